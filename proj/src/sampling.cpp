#include "berger/sampling.hpp"

namespace berger {

FrameVector random_gaussian(Rng& rng, int n) {
    std::normal_distribution<double> normal(0.0, 1.0);
    FrameVector v(2 * n);
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
    return v;
}

FrameVector random_unit(Rng& rng, int n) {
    FrameVector v = random_gaussian(rng, n);
    double norm = v.norm();
    while (norm < 1e-12) {
        v = random_gaussian(rng, n);
        norm = v.norm();
    }
    return FrameVector(v / norm);
}

double random_uniform(Rng& rng, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    return dist(rng);
}

} // namespace berger
