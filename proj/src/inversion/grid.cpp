#include "lightray/inversion/grid.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace lightray {

DiskGrid DiskGrid::make(const Domain& disk, int n)
{
    if (disk.kind != DomainKind::Disk) throw PreconditionError("DiskGrid: domain must be a disk");
    if (n < 5) throw PreconditionError("DiskGrid: need at least 5 nodes per side");
    DiskGrid g;
    g.n = n;
    g.center = disk.center;
    g.radius = disk.radius;
    g.h = 2.0 * disk.radius / (n - 1);
    return g;
}

Vec2 DiskGrid::node(int i, int j) const
{
    return center + Vec2(-radius + i * h, -radius + j * h);
}

bool DiskGrid::inside(int k) const
{
    return (node(k) - center).norm() < radius - 1e-12;
}

bool DiskGrid::near(int k, double dist) const
{
    return (node(k) - center).norm() <= radius + dist;
}

cd GridField::operator()(const Vec2& x) const
{
    const double u = (x.x() - (grid.center.x() - grid.radius)) / grid.h;
    const double v = (x.y() - (grid.center.y() - grid.radius)) / grid.h;
    if (u < 0.0 || v < 0.0 || u > grid.n - 1 || v > grid.n - 1) return 0.0;
    const int i = std::min(int(u), grid.n - 2), j = std::min(int(v), grid.n - 2);
    const double a = u - i, b = v - j;
    return (1 - a) * (1 - b) * values[grid.index(i, j)] + a * (1 - b) * values[grid.index(i + 1, j)] +
           (1 - a) * b * values[grid.index(i, j + 1)] + a * b * values[grid.index(i + 1, j + 1)];
}

GridField GridField::sample(const DiskGrid& g, const std::function<cd(const Vec2&)>& f, bool inside_only)
{
    GridField out(g);
    for (int k = 0; k < g.size(); ++k)
        if (!inside_only || g.inside(k)) out.values[k] = f(g.node(k));
    return out;
}

double GridField::norm_inside() const
{
    double s = 0.0;
    for (int k = 0; k < grid.size(); ++k)
        if (grid.inside(k)) s += std::norm(values[k]);
    return std::sqrt(s) * grid.h;
}

GridOneForm GridOneForm::sample(const DiskGrid& g, const std::function<Vec2c(const Vec2&)>& f, bool inside_only)
{
    GridOneForm out{GridField(g), GridField(g)};
    for (int k = 0; k < g.size(); ++k)
        if (!inside_only || g.inside(k)) {
            const Vec2c v = f(g.node(k));
            out.a1.values[k] = v[0];
            out.a2.values[k] = v[1];
        }
    return out;
}

namespace {

/// d/dx (axis 0) or d/dy (axis 1) with central differences inside and one-sided on the square's edge.
VecXc diff(const GridField& f, int axis)
{
    const DiskGrid& g = f.grid;
    VecXc out(g.size());
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            const int c = axis == 0 ? i : j;
            auto at = [&](int d) { return axis == 0 ? f.values[g.index(i + d, j)] : f.values[g.index(i, j + d)]; };
            cd v;
            if (c == 0)
                v = (at(1) - at(0)) / g.h;
            else if (c == g.n - 1)
                v = (at(0) - at(-1)) / g.h;
            else
                v = (at(1) - at(-1)) / (2.0 * g.h);
            out[g.index(i, j)] = v;
        }
    return out;
}

} // namespace

GridOneForm grid_gradient(const GridField& f)
{
    GridOneForm a{GridField(f.grid), GridField(f.grid)};
    a.a1.values = diff(f, 0);
    a.a2.values = diff(f, 1);
    return a;
}

GridField grid_divergence(const GridOneForm& a)
{
    GridField d(a.a1.grid);
    d.values = diff(a.a1, 0) + diff(a.a2, 1);
    return d;
}

GridField grid_curl(const GridOneForm& a)
{
    GridField d(a.a1.grid);
    d.values = diff(a.a2, 0) - diff(a.a1, 1);
    return d;
}

double relative_error_inside(const GridField& a, const GridField& b)
{
    GridField diffd(a.grid);
    diffd.values = a.values - b.values;
    const double nb = b.norm_inside();
    if (nb == 0.0) return diffd.norm_inside();
    return diffd.norm_inside() / nb;
}

void write_grid_csv(const GridField& f, std::ostream& out)
{
    out << "x1,x2,value_re,value_im\n" << std::setprecision(15);
    for (int k = 0; k < f.grid.size(); ++k) {
        if (!f.grid.inside(k)) continue;
        const Vec2 x = f.grid.node(k);
        out << x.x() << ',' << x.y() << ',' << f.values[k].real() << ',' << f.values[k].imag() << '\n';
    }
}

} // namespace lightray
