#pragma once

#include <functional>
#include <memory>
#include <string>

#include "umblt/core/fields.hpp"
#include "umblt/core/kernel.hpp"

namespace umblt {

using PointFunction = std::function<double(Vec2)>;

/// Coefficients as functions on the plane, so a medium can be resampled on any lattice.
struct MediumModel {
  PointFunction sigma;
  PointFunction source;
  PointFunction kernel_amplitude;  ///< spatial factor multiplying the kernel
  ScatteringKernel kernel;
  std::string label;
};

/// Coefficients sampled on a grid. Total scattering at x is kernel_amplitude(x)·k.
struct OpticalMedium {
  ScalarField sigma;
  ScalarField source;
  ScalarField kernel_amplitude;
  ScatteringKernel kernel;
  std::shared_ptr<const MediumModel> model;  ///< may be null for purely gridded media

  const GridPtr& grid() const { return sigma.grid(); }

  static OpticalMedium sample(std::shared_ptr<const MediumModel> model, GridPtr grid);
  static OpticalMedium from_fields(ScalarField sigma, ScalarField source, ScatteringKernel kernel);

  OpticalMedium with_source(ScalarField s) const;
  /// Sampled on another lattice; needs a model.
  OpticalMedium resampled(GridPtr grid) const;
  /// Validates shapes, finiteness, σ ≥ 0, k ≥ 0, amplitude ≥ 0.
  void validate() const;
};

}  // namespace umblt
