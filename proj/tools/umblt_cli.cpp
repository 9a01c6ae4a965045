#include "umblt/io/run.hpp"

int main(int argc, char** argv) { return umblt::run_cli(argc, argv); }
