#include "umblt/solver/transport_operator.hpp"

#include <algorithm>
#include <cmath>

#include "umblt/core/errors.hpp"
#include "umblt/core/parallel.hpp"

namespace umblt {

void BlockField::set_lane(int l, const AngularField& f) {
  for (int d = 0; d < n_dir; ++d)
    for (int a = 0; a < n_nodes; ++a) at(d, a, l) = f.at(d, a);
}

void BlockField::get_lane(int l, AngularField& f) const {
  for (int d = 0; d < n_dir; ++d)
    for (int a = 0; a < n_nodes; ++a) f.at(d, a) = at(d, a, l);
}

namespace {

struct RowBuilder {
  std::vector<std::pair<int, double>> e;
  void add(const std::vector<RaySample>& s) {
    for (const RaySample& r : s) {
      const double c = r.weight * r.atten;
      for (int k = 0; k < r.st.count; ++k) e.emplace_back(r.st.node[k], c * r.st.weight[k]);
    }
  }
  void flush(CsrMatrix& m) {
    std::sort(e.begin(), e.end(), [](auto& a, auto& b) { return a.first < b.first; });
    for (size_t k = 0; k < e.size();) {
      int c = e[k].first;
      double v = 0.0;
      for (; k < e.size() && e[k].first == c; ++k) v += e[k].second;
      m.col.push_back(c);
      m.val.push_back(v);
    }
    m.ptr.push_back(static_cast<int>(m.col.size()));
    ++m.rows;
    e.clear();
  }
};

template <int L>
void spmv_block(const CsrMatrix& m, const double* x, double* y, int lanes_rt) {
  const int lanes = L > 0 ? L : lanes_rt;
  for (int r = 0; r < m.rows; ++r) {
    double acc[16] = {0};
    for (int k = m.ptr[r]; k < m.ptr[r + 1]; ++k) {
      const double v = m.val[k];
      const double* src = x + static_cast<size_t>(m.col[k]) * lanes;
      for (int l = 0; l < lanes; ++l) acc[l] += v * src[l];
    }
    double* dst = y + static_cast<size_t>(r) * lanes;
    for (int l = 0; l < lanes; ++l) dst[l] = acc[l];
  }
}

void spmv_dispatch(const CsrMatrix& m, const double* x, double* y, int lanes) {
  switch (lanes) {
    case 1: return spmv_block<1>(m, x, y, 1);
    case 2: return spmv_block<2>(m, x, y, 2);
    case 4: return spmv_block<4>(m, x, y, 4);
    case 8: return spmv_block<8>(m, x, y, 8);
    default:
      if (lanes > 16) throw ValidationError("block solves support at most 16 lanes");
      return spmv_block<0>(m, x, y, lanes);
  }
}

}  // namespace

TransportOperator::TransportOperator(const ScalarField& sigma, const DirectionSet& dirs, SamplingPtr sampling,
                                     int quad_order, int workers)
    : grid_(sigma.grid()), dirs_(dirs), sampling_(std::move(sampling)), integrator_(sigma, quad_order) {
  const int nd = dirs_.size(), na = grid_->active_count();
  volume_.resize(nd);
  trace_.resize(nd);
  lift_.resize(nd);
  chord_atten_.assign(sampling_->total(), 1.0);
  const Domain& dom = grid_->domain();
  parallel_for(nd, workers, [&](int d) {
    const Vec2 th = dirs_.direction(d);
    std::vector<RaySample> smp;
    RowBuilder rb;
    CsrMatrix& V = volume_[d];
    V.col.reserve(static_cast<size_t>(na) * 16);
    V.val.reserve(static_cast<size_t>(na) * 16);
    lift_[d].resize(na);
    for (int a = 0; a < na; ++a) {
      const Vec2 x = grid_->node(a);
      const double L = exit_time(dom, x, th, Sign::Backward);
      Lift& lf = lift_[d][a];
      lf.atten = integrator_.trace(x, th, L, smp);
      lf.lerp = sampling_->locate(d, BoundarySide::GammaMinus, x - th * L);
      rb.add(smp);
      rb.flush(V);
    }
    CsrMatrix& Tr = trace_[d];
    for (int j = 0; j < sampling_->rays(d); ++j) {
      const BoundaryRay& r = sampling_->ray(d, j);
      chord_atten_[sampling_->start(d) + j] = integrator_.trace(r.exit, th, r.length, smp);
      rb.add(smp);
      rb.flush(Tr);
    }
  });
}

size_t TransportOperator::nnz() const {
  size_t n = 0;
  for (auto& m : volume_) n += m.nnz();
  return n;
}

void TransportOperator::apply(const AngularField& q, AngularField& out) const {
  for (int d = 0; d < dirs_.size(); ++d) spmv_dispatch(volume_[d], q.direction(d).data(), out.direction(d).data(), 1);
}

void TransportOperator::apply(const ScalarField& q, AngularField& out) const {
  for (int d = 0; d < dirs_.size(); ++d) spmv_dispatch(volume_[d], q.values().data(), out.direction(d).data(), 1);
}

void TransportOperator::lift(const BoundaryTrace& f, AngularField& out, bool accumulate) const {
  for (int d = 0; d < dirs_.size(); ++d) {
    auto dst = out.direction(d);
    for (int a = 0; a < grid_->active_count(); ++a) {
      const Lift& lf = lift_[d][a];
      double v = lf.atten * (lf.lerp.w0 * f.at(d, lf.lerp.j0) + lf.lerp.w1 * f.at(d, lf.lerp.j1));
      dst[a] = accumulate ? dst[a] + v : v;
    }
  }
}

BoundaryTrace TransportOperator::trace(const AngularField& q, const BoundaryTrace* f) const {
  BoundaryTrace out(BoundarySide::GammaPlus, sampling_);
  std::vector<double> tmp;
  for (int d = 0; d < dirs_.size(); ++d) {
    tmp.assign(sampling_->rays(d), 0.0);
    spmv_dispatch(trace_[d], q.direction(d).data(), tmp.data(), 1);
    for (int j = 0; j < sampling_->rays(d); ++j)
      out.at(d, j) = tmp[j] + (f ? chord_attenuation(d, j) * f->at(d, j) : 0.0);
  }
  return out;
}

void TransportOperator::apply_block(const BlockField& q, BlockField& out, int workers) const {
  const size_t stride = static_cast<size_t>(q.n_nodes) * q.lanes;
  parallel_for(dirs_.size(), workers, [&](int d) {
    spmv_dispatch(volume_[d], q.v.data() + d * stride, out.v.data() + d * stride, q.lanes);
  });
}

void TransportOperator::trace_block(const BlockField& q, BlockTrace& out) const {
  const size_t stride = static_cast<size_t>(q.n_nodes) * q.lanes;
  out.samples = sampling_->total();
  out.lanes = q.lanes;
  out.v.assign(static_cast<size_t>(out.samples) * q.lanes, 0.0);
  for (int d = 0; d < dirs_.size(); ++d)
    spmv_dispatch(trace_[d], q.v.data() + d * stride, out.v.data() + static_cast<size_t>(sampling_->start(d)) * q.lanes,
                  q.lanes);
}

double TransportOperator::evaluate_point(Vec2 x, int d, const AngularField& q, const BoundaryTrace* f) const {
  const Vec2 th = dirs_.direction(d);
  const double L = exit_time(grid_->domain(), x, th, Sign::Backward);
  std::vector<RaySample> smp;
  const double B = integrator_.trace(x, th, L, smp);
  auto qd = q.direction(d);
  double v = 0.0;
  for (const RaySample& r : smp) {
    double s = 0.0;
    for (int k = 0; k < r.st.count; ++k) s += r.st.weight[k] * qd[r.st.node[k]];
    v += r.weight * r.atten * s;
  }
  if (f) v += B * f->interpolate(d, x - th * L);
  return v;
}

ScatteringOperator::ScatteringOperator(const ScatteringKernel& kernel, const ScalarField& amplitude,
                                       const DirectionSet& dirs)
    : amp_(amplitude.values()), n_dir_(dirs.size()), w_(dirs.weight(0)) {
  auto row = kernel.circulant_row(dirs);
  wrow_.resize(n_dir_);
  for (int m = 0; m < n_dir_; ++m) wrow_[m] = dirs.weight(m) * row[m];
  const auto& fc = kernel.fourier_coeffs();
  harmonic_ = fc && static_cast<int>(fc->size()) <= std::max(1, n_dir_ / 4);
  zero_ = std::all_of(wrow_.begin(), wrow_.end(), [](double v) { return v == 0.0; }) ||
          std::all_of(amp_.begin(), amp_.end(), [](double v) { return v == 0.0; });
  if (harmonic_) {
    coeffs_ = *fc;
    cosn_.assign(coeffs_.size(), std::vector<double>(n_dir_));
    sinn_.assign(coeffs_.size(), std::vector<double>(n_dir_));
    for (size_t n = 0; n < coeffs_.size(); ++n)
      for (int j = 0; j < n_dir_; ++j) {
        cosn_[n][j] = std::cos(n * dirs.angle(j));
        sinn_[n][j] = std::sin(n * dirs.angle(j));
      }
  }
}

namespace {
// Shared kernel for AngularField (lanes = 1) and BlockField layouts.
void scatter(const std::vector<double>& amp, int lanes, int nd, const double* u, double* out, bool harmonic,
             const std::vector<double>& coeffs, const std::vector<std::vector<double>>& cosn,
             const std::vector<std::vector<double>>& sinn, const std::vector<double>& wrow, double w) {
  const size_t M = amp.size() * lanes;
  std::fill(out, out + M * nd, 0.0);
  if (harmonic) {
    std::vector<double> C(M), S(M);
    for (size_t n = 0; n < coeffs.size(); ++n) {
      std::fill(C.begin(), C.end(), 0.0);
      std::fill(S.begin(), S.end(), 0.0);
      for (int j = 0; j < nd; ++j) {
        const double cw = w * cosn[n][j], sw = w * sinn[n][j];
        const double* uj = u + j * M;
        for (size_t m = 0; m < M; ++m) C[m] += cw * uj[m];
        if (n > 0)
          for (size_t m = 0; m < M; ++m) S[m] += sw * uj[m];
      }
      const double f = n == 0 ? coeffs[0] : 2.0 * coeffs[n];
      for (int i = 0; i < nd; ++i) {
        const double ci = f * cosn[n][i], si = f * sinn[n][i];
        double* oi = out + i * M;
        if (n == 0)
          for (size_t m = 0; m < M; ++m) oi[m] += ci * C[m];
        else
          for (size_t m = 0; m < M; ++m) oi[m] += ci * C[m] + si * S[m];
      }
    }
  } else {
    for (int i = 0; i < nd; ++i) {
      double* oi = out + i * M;
      for (int j = 0; j < nd; ++j) {
        const double c = wrow[((i - j) % nd + nd) % nd];
        const double* uj = u + j * M;
        for (size_t m = 0; m < M; ++m) oi[m] += c * uj[m];
      }
    }
  }
  for (int i = 0; i < nd; ++i) {
    double* oi = out + i * M;
    for (size_t a = 0; a < amp.size(); ++a)
      for (int l = 0; l < lanes; ++l) oi[a * lanes + l] *= amp[a];
  }
}
}  // namespace

void ScatteringOperator::apply(const AngularField& u, AngularField& out) const {
  scatter(amp_, 1, n_dir_, u.values().data(), out.values().data(), harmonic_, coeffs_, cosn_, sinn_, wrow_, w_);
}

void ScatteringOperator::apply_block(const BlockField& u, BlockField& out) const {
  scatter(amp_, u.lanes, n_dir_, u.v.data(), out.v.data(), harmonic_, coeffs_, cosn_, sinn_, wrow_, w_);
}

}  // namespace umblt
