#include "speckstack/g0.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "speckstack/error.hpp"

namespace speckstack {

void G0Params::validate() const
{
    if (!(alpha < 0.0) || !std::isfinite(alpha))
        throw DomainError("G0 roughness must be negative, got " + std::to_string(alpha));
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw DomainError("G0 scale must be positive, got " + std::to_string(gamma));
    if (!(looks >= 1.0) || !std::isfinite(looks))
        throw DomainError("G0 looks must be >= 1, got " + std::to_string(looks));
}

double g0_density(double z, const G0Params& p)
{
    p.validate();
    if (!(z > 0.0))
        throw DomainError("G0 density requires z > 0");
    const double n = p.looks;
    const double a = p.alpha;
    const double log_norm = n * std::log(n) + std::lgamma(n - a) - a * std::log(p.gamma)
                            - std::lgamma(n) - std::lgamma(-a);
    const double log_kernel = (n - 1.0) * std::log(z) - (n - a) * std::log(p.gamma + n * z);
    return std::exp(log_norm + log_kernel);
}

double g0_moment(double r, const G0Params& p)
{
    p.validate();
    if (!(p.alpha < -r))
        return std::numeric_limits<double>::infinity();
    const double n = p.looks;
    const double a = p.alpha;
    const double log_m = r * std::log(p.gamma / n) + std::lgamma(-a - r) + std::lgamma(n + r)
                         - std::lgamma(-a) - std::lgamma(n);
    return std::exp(log_m);
}

double gamma_star(double alpha, double looks)
{
    if (!(alpha < -1.0))
        throw DomainError("G0 mean is infinite for alpha >= -1");
    if (!(looks >= 1.0))
        throw DomainError("G0 looks must be >= 1");
    // E[Z] = gamma / (-alpha - 1); the looks cancel.
    return -alpha - 1.0;
}

double sample_g0(const G0Params& p, Rng& rng)
{
    const double backscatter = p.gamma / rng.gamma(-p.alpha);
    const double speckle = rng.gamma(p.looks) / p.looks;
    return backscatter * speckle;
}

std::vector<double> sample_g0(const G0Params& p, std::size_t count, Rng& rng)
{
    p.validate();
    std::vector<double> out(count);
    for (auto& z : out)
        z = sample_g0(p, rng);
    return out;
}

G0Params g0_with_mean(double alpha, double looks, double mean)
{
    if (!(mean > 0.0))
        throw DomainError("target mean must be positive");
    G0Params p{alpha, mean * gamma_star(alpha, looks), looks};
    p.validate();
    return p;
}

}  // namespace speckstack
