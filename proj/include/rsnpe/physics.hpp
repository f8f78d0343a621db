#pragma once

#include "rsnpe/common.hpp"

namespace rsnpe::physics {

/// Normal-incidence Fresnel power reflectance |(1-sqrt(eps))/(1+sqrt(eps))|^2.
/// eps is the relative dielectric constant of the half-space, eps >= 1.
Real fresnel_power_reflectance(Real eps);

/// Normal-incidence Fresnel amplitude coefficient (1-sqrt(eps))/(1+sqrt(eps)).
/// Negative for eps > 1 (phase reversal at the interface).
Real fresnel_amplitude(Real eps);

/// Reference-normalized relative power: h = (p / p_ref) * reflectance(eps_ref).
/// All powers in linear units; p_ref must be strictly positive.
Real compute_h(Real p, Real p_ref, Real eps_ref);

Real db_to_linear(Real db);
Real linear_to_db(Real linear);

/// Rescales a reference power measured at altitude r_ref to altitude r.
/// The factor (r/r_ref)^exponent is applied in linear power; exponent defaults
/// to +1 (multiply), exposed because the correction direction is a convention.
Real altitude_rescale(Real p_ref, Real r_ref_km, Real r_km, int exponent = +1);

}  // namespace rsnpe::physics
