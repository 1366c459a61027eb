#include "lightray/transforms/light_ray.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

namespace lightray {

RaySamples sample_ray(const RiemannianChart& chart, const Vec2& y, const Vec2& v, int samples, int steps)
{
    if (samples < 3 || samples % 2 == 0) throw PreconditionError("sample_ray: samples must be odd and >= 3");
    if (steps % (samples - 1) != 0) throw PreconditionError("sample_ray: steps must be a multiple of samples - 1");
    const Domain& dom = chart.domain();
    if (chart.is_euclidean() && dom.kind == DomainKind::Disk) {
        // straight chord, exit time from |y + t v - c| = R
        const Vec2 d = y - dom.center;
        const double a = v.squaredNorm(), b = d.dot(v), c = d.squaredNorm() - dom.radius * dom.radius;
        const double disc = b * b - a * c;
        if (disc <= 0.0) throw DomainError("sample_ray: chord misses the disk");
        RaySamples r;
        r.length = (-b + std::sqrt(disc)) / a;
        if (r.length <= 0.0) throw DomainError("sample_ray: direction points out of the disk");
        for (int k = 0; k < samples; ++k) {
            r.x.push_back(y + (r.length * k / (samples - 1)) * v);
            r.v.push_back(v);
        }
        return r;
    }
    const GeodesicPath probe = integrate_geodesic(chart, y, v, chart.domain().diameter() / steps);
    const GeodesicPath path = integrate_geodesic_length(chart, y, v, probe.exit_time, steps);
    const int stride = steps / (samples - 1);
    RaySamples r;
    r.length = probe.exit_time;
    r.x.reserve(samples);
    r.v.reserve(samples);
    for (int k = 0; k < samples; ++k) {
        r.x.push_back(path.samples[size_t(k) * stride].x);
        r.v.push_back(path.samples[size_t(k) * stride].v);
    }
    return r;
}

double RayFamily::max_length() const
{
    double L = 0.0;
    for (const auto& r : rays) L = std::max(L, r.length);
    return L;
}

namespace {

void finish(RayFamily& fam)
{
    const double L = fam.max_length();
    const int n = fam.options.n_ttilde;
    if (n < 3 || n % 2 == 0) throw PreconditionError("RayFamily: n_ttilde must be odd and >= 3");
    fam.ttilde.resize(n);
    for (int i = 0; i < n; ++i) fam.ttilde[i] = -L + (fam.options.T + 2.0 * L) * i / (n - 1);
}

} // namespace

RayFamily RayFamily::disk(const RiemannianChart& chart, const RayFamilyOptions& opt)
{
    const Domain& dom = chart.domain();
    if (dom.kind != DomainKind::Disk) throw PreconditionError("RayFamily::disk needs a disk domain");
    if (opt.n_angles < 1 || opt.n_offsets < 1) throw PreconditionError("RayFamily::disk: empty family");
    if (opt.samples < 3 || opt.samples % 2 == 0 || opt.steps % (opt.samples - 1) != 0)
        throw PreconditionError("RayFamily::disk: samples must be odd and divide steps into equal strides");
    RayFamily fam;
    fam.domain = dom;
    fam.options = opt;
    const double span = opt.full_circle ? 2.0 * kPi : kPi;
    std::vector<std::pair<double, double>> params;
    for (int a = 0; a < opt.n_angles; ++a)
        for (int o = 0; o < opt.n_offsets; ++o) {
            const double th = span * a / opt.n_angles;
            const double p = opt.n_offsets == 1 ? 0.0 : -opt.max_offset + 2.0 * opt.max_offset * o / (opt.n_offsets - 1);
            params.emplace_back(th, p);
        }
    fam.rays.resize(params.size());
    std::vector<std::exception_ptr> errors(params.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (int k = 0; k < int(params.size()); ++k) {
        const auto [th, p] = params[k];
        const Vec2 d(std::cos(th), std::sin(th)), nrm(-std::sin(th), std::cos(th));
        // start slightly inside so the first node is an interior point
        const Vec2 y = dom.center + dom.radius * (p * nrm - std::sqrt(1.0 - p * p) * (1.0 - 1e-12) * d);
        try {
            RaySamples r = sample_ray(chart, y, normalize_velocity(chart, y, d), opt.samples, opt.steps);
            r.angle = th;
            r.offset = p;
            fam.rays[k] = std::move(r);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    finish(fam);
    return fam;
}

RayFamily RayFamily::from_entries(const RiemannianChart& chart, const std::vector<std::pair<Vec2, Vec2>>& entries,
                                  const RayFamilyOptions& opt)
{
    RayFamily fam;
    fam.domain = chart.domain();
    fam.options = opt;
    for (const auto& [y, d] : entries) {
        RaySamples r = sample_ray(chart, y, normalize_velocity(chart, y, d), opt.samples, opt.steps);
        r.angle = std::atan2(d.y(), d.x());
        r.offset = 0.0;
        fam.rays.push_back(std::move(r));
    }
    finish(fam);
    return fam;
}

} // namespace lightray
