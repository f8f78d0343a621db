#include "rsnpe/physics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rsnpe::physics {

Real fresnel_amplitude(Real eps) {
    if (!(eps >= 1.0)) {
        throw std::domain_error("fresnel_amplitude: eps must be >= 1, got " + std::to_string(eps));
    }
    const Real root = std::sqrt(eps);
    return (1.0 - root) / (1.0 + root);
}

Real fresnel_power_reflectance(Real eps) {
    const Real g = fresnel_amplitude(eps);
    return g * g;
}

Real compute_h(Real p, Real p_ref, Real eps_ref) {
    if (!(p_ref > 0.0)) {
        throw std::domain_error("compute_h: p_ref must be > 0, got " + std::to_string(p_ref));
    }
    if (!(p >= 0.0)) {
        throw std::domain_error("compute_h: p must be >= 0, got " + std::to_string(p));
    }
    return (p / p_ref) * fresnel_power_reflectance(eps_ref);
}

Real db_to_linear(Real db) {
    if (!std::isfinite(db)) throw std::domain_error("db_to_linear: non-finite input");
    return std::pow(10.0, db / 10.0);
}

Real linear_to_db(Real linear) {
    if (!(linear > 0.0)) {
        throw std::domain_error("linear_to_db: value must be > 0, got " + std::to_string(linear));
    }
    return 10.0 * std::log10(linear);
}

Real altitude_rescale(Real p_ref, Real r_ref_km, Real r_km, int exponent) {
    if (!(r_ref_km > 0.0) || !(r_km > 0.0)) {
        throw std::domain_error("altitude_rescale: altitudes must be > 0");
    }
    if (!(p_ref >= 0.0)) {
        throw std::domain_error("altitude_rescale: p_ref must be >= 0");
    }
    const Real factor = r_km / r_ref_km;
    return exponent >= 0 ? p_ref * factor : p_ref / factor;
}

}  // namespace rsnpe::physics
