#include "umblt/core/certificate.hpp"

#include <sstream>

#include "umblt/core/errors.hpp"

namespace umblt {

double SubcriticalityCertificate::contraction() const {
  return mode == CertificateMode::Absorption ? rho / (rho + alpha) : tau * rho;
}

std::string SubcriticalityCertificate::mode_name() const {
  return mode == CertificateMode::Absorption ? "absorption" : "smallness";
}

SubcriticalityCertificate validate_subcriticality(const OpticalMedium& medium, const DirectionSet& dirs) {
  medium.validate();
  SubcriticalityCertificate c;
  c.rho = medium.kernel.quadrature_mass(dirs) * medium.kernel_amplitude.max();
  c.min_sigma = medium.sigma.min();
  c.max_sigma = medium.sigma.max();
  c.tau = medium.grid()->domain().diameter();
  c.a = c.rho + c.max_sigma;
  if (c.min_sigma - c.rho > 0.0) {
    c.mode = CertificateMode::Absorption;
    c.alpha = c.min_sigma - c.rho;
    return c;
  }
  if (c.tau * c.rho < 1.0) {
    c.mode = CertificateMode::Smallness;
    return c;
  }
  std::ostringstream os;
  os << "medium is not certified subcritical: min sigma " << c.min_sigma << " <= rho " << c.rho
     << " and tau*rho = " << c.tau * c.rho << " >= 1";
  throw NumericalError(os.str());
}

}  // namespace umblt
