#include "lightray/common.hpp"

#include <algorithm>

namespace lightray {

std::vector<double> simpson_weights(int n, double h)
{
    if (n < 3 || n % 2 == 0)
        throw PreconditionError("simpson_weights: need an odd node count >= 3, got " + std::to_string(n));
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i)
        w[i] = (i == 0 || i == n - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    for (auto& x : w) x *= h / 3.0;
    return w;
}

std::vector<double> trapezoid_weights(int n, double h)
{
    if (n < 2) throw PreconditionError("trapezoid_weights: need at least 2 nodes");
    std::vector<double> w(n, h);
    w.front() = w.back() = 0.5 * h;
    return w;
}

void local_cubic_weights(const std::vector<double>& xs, double x, size_t& i0, double w[4], double dw[4])
{
    const size_t n = xs.size();
    if (n < 4) throw PreconditionError("local_cubic_weights: need at least 4 nodes");
    size_t k = size_t(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
    // nodes k-2 .. k+1 around the interval [xs[k-1], xs[k]]
    i0 = k < 2 ? 0 : std::min(k - 2, n - 4);
    const double* X = xs.data() + i0;
    for (int a = 0; a < 4; ++a) {
        double num = 1.0, den = 1.0, d = 0.0;
        for (int b = 0; b < 4; ++b) {
            if (b == a) continue;
            den *= X[a] - X[b];
            num *= x - X[b];
        }
        for (int c = 0; c < 4; ++c) {
            if (c == a) continue;
            double p = 1.0;
            for (int b = 0; b < 4; ++b)
                if (b != a && b != c) p *= x - X[b];
            d += p;
        }
        w[a] = num / den;
        dw[a] = d / den;
    }
}

} // namespace lightray
