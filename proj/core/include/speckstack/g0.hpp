#pragma once

#include <cstddef>
#include <vector>

#include "speckstack/rng.hpp"

namespace speckstack {

/// Intensity G0 law: roughness alpha < 0, scale gamma > 0, looks >= 1.
struct G0Params {
    double alpha = -5.0;
    double gamma = 4.0;
    double looks = 1.0;

    /// Throws DomainError unless alpha < 0, gamma > 0 and looks >= 1.
    void validate() const;
};

/// Density of the intensity G0 law at z > 0, evaluated in the log domain.
double g0_density(double z, const G0Params& p);

/// E[Z^r]; +infinity when alpha >= -r (the moment does not exist).
double g0_moment(double r, const G0Params& p);

/// Scale giving a unit-mean law for the given roughness and looks.
/// Throws DomainError for alpha >= -1.
double gamma_star(double alpha, double looks);

/// Z = X * Y with 1/X ~ Gamma(-alpha, rate gamma), Y ~ Gamma(looks, rate looks).
double sample_g0(const G0Params& p, Rng& rng);
std::vector<double> sample_g0(const G0Params& p, std::size_t count, Rng& rng);

/// Params for a region whose theoretical mean is `mean`.
G0Params g0_with_mean(double alpha, double looks, double mean);

}  // namespace speckstack
