#include "dcdt/random.hpp"

#include <cmath>
#include <numbers>

namespace dcdt {

double Rng::normal(double mean, double sigma) {
    if (sigma == 0.0) {
        // Keep the stream position independent of sigma.
        uniform();
        uniform();
        return mean;
    }
    double u1 = uniform();
    const double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return mean + sigma * z;
}

int Rng::poisson(double rate) {
    if (rate <= 0.0) return 0;
    const double limit = std::exp(-rate);
    int k = 0;
    double prod = uniform();
    while (prod > limit) {
        ++k;
        prod *= uniform();
    }
    return k;
}

}  // namespace dcdt
