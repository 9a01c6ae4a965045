#include "umblt/control/family.hpp"

#include "umblt/core/errors.hpp"

namespace umblt {

AngularControlFamily::AngularControlFamily(const RteSolver& solver) : s_(solver) {
  const int nd = s_.directions().size();
  std::vector<BoundaryTrace> data;
  for (int j = 0; j < nd; ++j) {
    std::vector<double> e(nd, 0.0);
    e[j] = 1.0;
    data.push_back(BoundaryTrace::angular(BoundarySide::GammaMinus, s_.sampling(), e));
  }
  for (auto& sol : s_.solve_homogeneous(data)) basis_.push_back(std::move(sol.u));
}

Eigen::MatrixXd AngularControlFamily::response_at_node(int a, ControlForm form) const {
  const int nd = size();
  const DirectionSet& dirs = s_.directions();
  Eigen::MatrixXd E(nd, nd);
  for (int j = 0; j < nd; ++j)
    for (int i = 0; i < nd; ++i)
      E(i, j) = form == ControlForm::Forward ? basis_[j].at(i, a)
                                             : basis_[dirs.opposite(j)].at(dirs.opposite(i), a);
  return E;
}

Eigen::MatrixXd AngularControlFamily::response_at(Vec2 x, ControlForm form) const {
  const int nd = size();
  const DirectionSet& dirs = s_.directions();
  const ScalarField zero(s_.grid(), 0.0);
  Eigen::MatrixXd F(nd, nd);
  for (int j = 0; j < nd; ++j) {
    std::vector<double> e(nd, 0.0);
    e[j] = 1.0;
    BoundaryTrace f = BoundaryTrace::angular(BoundarySide::GammaMinus, s_.sampling(), e);
    std::vector<double> vx = s_.evaluate_at(x, basis_[j], zero, &f);
    for (int i = 0; i < nd; ++i) F(i, j) = vx[i];
  }
  if (form == ControlForm::Forward) return F;
  Eigen::MatrixXd E(nd, nd);
  for (int j = 0; j < nd; ++j)
    for (int i = 0; i < nd; ++i) E(i, j) = F(dirs.opposite(i), dirs.opposite(j));
  return E;
}

BoundaryTrace AngularControlFamily::boundary_data(const Eigen::VectorXd& c, ControlForm form) const {
  std::vector<double> per(c.data(), c.data() + c.size());
  return BoundaryTrace::angular(form == ControlForm::Forward ? BoundarySide::GammaMinus : BoundarySide::GammaPlus,
                                s_.sampling(), per);
}

AngularField AngularControlFamily::field(const Eigen::VectorXd& c, ControlForm form) const {
  const DirectionSet& dirs = s_.directions();
  AngularField v(s_.grid(), size());
  for (int j = 0; j < size(); ++j) {
    const double cj = form == ControlForm::Forward ? c(j) : c(dirs.opposite(j));
    if (cj == 0.0) continue;
    const auto& b = basis_[j].values();
    for (size_t k = 0; k < b.size(); ++k) v.values()[k] += cj * b[k];
  }
  return form == ControlForm::Forward ? v : v.reversed();
}

ControlResult AngularControlFamily::control(Vec2 x0, const AngularProfile& h, ControlForm form) const {
  const DirectionSet& dirs = s_.directions();
  if (h.size() != size()) throw ValidationError("profile size differs from the direction count");
  h.require_finite();
  const Domain& dom = s_.grid()->domain();
  if (!dom.contains(x0) || dom.signed_distance(x0) <= 0.0) throw ValidationError("control point must be interior");
  Eigen::MatrixXd E = response_at(x0, form);
  Eigen::VectorXd hv = Eigen::Map<const Eigen::VectorXd>(h.h.data(), h.size());
  Eigen::VectorXd c = E.partialPivLu().solve(hv);
  ControlResult r;
  r.form = form;
  r.x0 = x0;
  r.h = h;
  r.tau_a = dom.diameter() * s_.certificate().a;
  r.method = "angular family";
  r.g = boundary_data(c, form);
  r.v = field(c, form);
  Eigen::VectorXd vx = E * c;
  r.v_at_x0.assign(vx.data(), vx.data() + vx.size());
  for (int i = 0; i < size(); ++i) r.achieved_error = std::max(r.achieved_error, std::abs(vx(i) - h.h[i]));
  r.pre_correction_error = r.achieved_error;
  const double h1 = h.l1(dirs);
  r.norm_constant = h1 > 0.0 ? (norm_1_inf(r.v, dirs) + norm_1_inf(r.g)) / h1 : 0.0;
  return r;
}

double AngularControlFamily::condition(int a, ControlForm form) const {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(response_at_node(a, form));
  const auto& sv = svd.singularValues();
  return sv(0) / sv(sv.size() - 1);
}

}  // namespace umblt
