#include "oracle/dense.hpp"

#include <cmath>

namespace umblt::oracle {

Eigen::MatrixXd iteration_matrix(const RteSolver& s) {
  const int nd = s.directions().size(), na = s.grid()->active_count();
  const auto& wrow = s.scattering().weighted_row();
  const auto& amp = s.scattering().amplitude();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nd * na, nd * na);
  for (int d = 0; d < nd; ++d) {
    const CsrMatrix& V = s.transport().volume(d);
    for (int a = 0; a < na; ++a)
      for (int k = V.ptr[a]; k < V.ptr[a + 1]; ++k) {
        const int c = V.col[k];
        for (int j = 0; j < nd; ++j)
          K(dense_index(s, d, a), dense_index(s, j, c)) += V.val[k] * amp[c] * wrow[((d - j) % nd + nd) % nd];
      }
  }
  return K;
}

AngularField dense_forward(const RteSolver& s, const ScalarField& S, const BoundaryTrace& f) {
  const int nd = s.directions().size(), na = s.grid()->active_count();
  AngularField b = s.lift_boundary(f);
  AngularField ts(s.grid(), nd);
  s.transport().apply(S, ts);
  Eigen::VectorXd rhs(nd * na);
  for (int d = 0; d < nd; ++d)
    for (int a = 0; a < na; ++a) rhs(dense_index(s, d, a)) = b.at(d, a) + ts.at(d, a);
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(nd * na, nd * na) - iteration_matrix(s);
  Eigen::VectorXd u = A.partialPivLu().solve(rhs);
  AngularField out(s.grid(), nd);
  for (int d = 0; d < nd; ++d)
    for (int a = 0; a < na; ++a) out.at(d, a) = u(dense_index(s, d, a));
  return out;
}

AngularField dense_adjoint(const RteSolver& s, const BoundaryTrace& f_plus) {
  return dense_forward(s, ScalarField(s.grid(), 0.0), reverse_trace(f_plus)).reversed();
}

Eigen::MatrixXd transport_matrix(const RteSolver& s) {
  const int nd = s.directions().size(), na = s.grid()->active_count();
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(nd * na, nd * na);
  for (int d = 0; d < nd; ++d) {
    const CsrMatrix& V = s.transport().volume(d);
    for (int a = 0; a < na; ++a)
      for (int k = V.ptr[a]; k < V.ptr[a + 1]; ++k) T(dense_index(s, d, a), dense_index(s, d, V.col[k])) += V.val[k];
  }
  return T;
}

Eigen::MatrixXd scattering_matrix(const RteSolver& s) {
  const int nd = s.directions().size(), na = s.grid()->active_count();
  const auto& wrow = s.scattering().weighted_row();
  const auto& amp = s.scattering().amplitude();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nd * na, nd * na);
  for (int d = 0; d < nd; ++d)
    for (int j = 0; j < nd; ++j)
      for (int a = 0; a < na; ++a) K(dense_index(s, d, a), dense_index(s, j, a)) = amp[a] * wrow[((d - j) % nd + nd) % nd];
  return K;
}

Eigen::MatrixXd trace_matrix(const RteSolver& s) {
  const int nd = s.directions().size(), na = s.grid()->active_count();
  const auto& smp = *s.sampling();
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(smp.total(), nd * na);
  for (int d = 0; d < nd; ++d) {
    const CsrMatrix& M = s.transport().trace_rows(d);
    for (int j = 0; j < M.rows; ++j)
      for (int k = M.ptr[j]; k < M.ptr[j + 1]; ++k) R(smp.start(d) + j, dense_index(s, d, M.col[k])) += M.val[k];
  }
  return R;
}

Eigen::VectorXd to_dense(const RteSolver& s, const AngularField& f) {
  Eigen::VectorXd v(f.size());
  for (int d = 0; d < f.n_dir(); ++d)
    for (int a = 0; a < f.n_nodes(); ++a) v(dense_index(s, d, a)) = f.at(d, a);
  return v;
}

AngularField from_dense(const RteSolver& s, const Eigen::VectorXd& v) {
  AngularField f(s.grid(), s.directions().size());
  for (int d = 0; d < f.n_dir(); ++d)
    for (int a = 0; a < f.n_nodes(); ++a) f.at(d, a) = v(dense_index(s, d, a));
  return f;
}

DenseMeasurement dense_measurement(const RteSolver& s, const std::vector<double>& c, double eps) {
  const int nd = s.directions().size(), na = s.grid()->active_count(), n = nd * na;
  Eigen::MatrixXd T = transport_matrix(s), K = scattering_matrix(s), R = trace_matrix(s);
  Eigen::VectorXd sig(n), cc(n), S(n);
  for (int d = 0; d < nd; ++d)
    for (int a = 0; a < na; ++a) {
      sig(dense_index(s, d, a)) = s.medium().sigma[a];
      cc(dense_index(s, d, a)) = c[a];
      S(dense_index(s, d, a)) = s.medium().source[a];
    }
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd u0 = (I - T * K).partialPivLu().solve(T * S);
  Eigen::VectorXd r0 = S - sig.cwiseProduct(u0) + K * u0;
  // Collision operator of the perturbation: Σ + εC(Σ − diag σ).
  Eigen::MatrixXd P = K + eps * cc.asDiagonal() * (K - Eigen::MatrixXd(sig.asDiagonal()));
  Eigen::VectorXd q0 = cc.cwiseProduct(r0);
  Eigen::VectorXd w = (I - T * P).partialPivLu().solve(T * q0);
  Eigen::VectorXd tr = R * (q0 + P * w);
  DenseMeasurement m{from_dense(s, w), BoundaryTrace(BoundarySide::GammaPlus, s.sampling())};
  for (int k = 0; k < tr.size(); ++k) m.trace.values()[k] = tr(k);
  return m;
}

double transparent_constant(double S, double sigma, double tau) { return S / sigma * (1.0 - std::exp(-sigma * tau)); }

}  // namespace umblt::oracle
