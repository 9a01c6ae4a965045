#include "umblt/core/medium.hpp"

#include "umblt/core/errors.hpp"

namespace umblt {

OpticalMedium OpticalMedium::sample(std::shared_ptr<const MediumModel> model, GridPtr grid) {
  if (!model || !model->sigma) throw ValidationError("medium model needs a sigma function");
  OpticalMedium m;
  m.sigma = ScalarField::sample(grid, model->sigma);
  m.source = model->source ? ScalarField::sample(grid, model->source) : ScalarField(grid, 0.0);
  m.kernel_amplitude =
      model->kernel_amplitude ? ScalarField::sample(grid, model->kernel_amplitude) : ScalarField(grid, 1.0);
  m.kernel = model->kernel;
  m.model = std::move(model);
  return m;
}

OpticalMedium OpticalMedium::from_fields(ScalarField sigma, ScalarField source, ScatteringKernel kernel) {
  OpticalMedium m;
  m.kernel_amplitude = ScalarField(sigma.grid(), 1.0);
  m.sigma = std::move(sigma);
  m.source = std::move(source);
  m.kernel = std::move(kernel);
  return m;
}

OpticalMedium OpticalMedium::with_source(ScalarField s) const {
  OpticalMedium m = *this;
  m.source = std::move(s);
  return m;
}

OpticalMedium OpticalMedium::resampled(GridPtr grid) const {
  if (!model) throw ValidationError("medium has no model to resample from");
  return sample(model, std::move(grid));
}

void OpticalMedium::validate() const {
  const GridPtr& g = sigma.grid();
  if (!g) throw ValidationError("medium has no grid");
  if (source.grid().get() != g.get() && !(source.grid() && source.grid()->same_lattice(*g)))
    throw ValidationError("source lives on a different grid than sigma");
  if (kernel_amplitude.size() != sigma.size() || source.size() != sigma.size())
    throw ValidationError("medium fields differ in size");
  sigma.require_finite("sigma");
  source.require_finite("source");
  kernel_amplitude.require_finite("kernel_amplitude");
  if (sigma.min() < 0.0) throw ValidationError("sigma < 0 somewhere");
  if (kernel_amplitude.min() < 0.0) throw ValidationError("kernel amplitude < 0 somewhere");
  if (kernel.min_value() < -1e-14) throw ValidationError("scattering kernel takes negative values");
}

}  // namespace umblt
