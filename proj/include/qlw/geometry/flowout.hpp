#ifndef QLW_GEOMETRY_FLOWOUT_HPP
#define QLW_GEOMETRY_FLOWOUT_HPP

// Fans of null geodesics over the lightlike directions within g+-distance s0
// of xi0 (same g+-norm), and the interiority of fan-fan intersections in d = 2.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include <Eigen/SVD>

#include "qlw/error.hpp"
#include "qlw/geometry/bichar.hpp"
#include "qlw/geometry/conjugate.hpp"
#include "qlw/parallel.hpp"

namespace qlw::geo
{
    struct FlowoutConfig
    {
        Vec x0;
        Vec xi0;
        double s0 = 0.02;
        int fan_count = 9;
        double ds = 1e-3;
        double max_s = 2.0;
        double aperture_cap = 0.05; // radians
    };

    struct Fan
    {
        FlowoutConfig config;
        double aperture = 0;    // half-angle of the spatial cone of directions
        std::vector<Vec> zetas; // initial covectors
        std::vector<BicharPath> paths;
    };

    /// Half-angle a with 2 c |xi'| sin(a / 2) = s0.
    inline double fan_aperture(const Metric& m, const Vec& x0, const Vec& xi0, double s0)
    {
        const double c = m.speed.value(x0[0], x0.tail(m.dim));
        const double r = s0 / (2 * c * xi0.tail(m.dim).norm());
        if (!(s0 > 0) || !(r < 1))
            fail(ErrorKind::SchemaError, "fan aperture s0 must be positive and below 2 |xi0|_{g+}");
        return 2 * std::asin(r);
    }

    inline Fan flowout_fan(const FlowoutConfig& cfg, const Metric& m)
    {
        m.validate();
        const int d = m.dim;
        if (cfg.x0.size() != d + 1 || cfg.xi0.size() != d + 1)
            fail(ErrorKind::SchemaError, "x0 and xi0 need d + 1 components");
        if (std::abs(m.hamiltonian(cfg.x0, cfg.xi0)) > 1e-8 * cfg.xi0.squaredNorm() || !(cfg.xi0[0] < 0))
            fail(ErrorKind::NotLightlike, "xi0 must be future lightlike");
        if (cfg.fan_count < 1)
            fail(ErrorKind::SchemaError, "fan_count must be positive");
        Fan fan;
        fan.config = cfg;
        fan.aperture = fan_aperture(m, cfg.x0, cfg.xi0, cfg.s0);
        if (fan.aperture > cfg.aperture_cap)
            fail(ErrorKind::SchemaError, "fan aperture exceeds the configured cap");

        const Vec xs = cfg.xi0.tail(d);
        const double r = xs.norm();
        const Vec u = xs / r;
        auto with_dir = [&](const Vec& w) {
            Vec z(d + 1);
            z[0] = cfg.xi0[0];
            z.tail(d) = r * w;
            return z;
        };
        if (d == 1 || cfg.fan_count == 1)
            fan.zetas.push_back(cfg.xi0);
        else if (d == 2)
        {
            const Vec perp = vec({-u[1], u[0]});
            for (int i = 0; i < cfg.fan_count; ++i)
            {
                const double a = fan.aperture * (2.0 * i / (cfg.fan_count - 1) - 1);
                fan.zetas.push_back(with_dir(std::cos(a) * u + std::sin(a) * perp));
            }
        }
        else
        {
            // centre plus a ring on the cone boundary
            Eigen::JacobiSVD<Mat> svd(Mat(u.transpose()), Eigen::ComputeFullV);
            const Mat E = svd.matrixV().rightCols(2);
            fan.zetas.push_back(cfg.xi0);
            for (int i = 0; i + 1 < cfg.fan_count; ++i)
            {
                const double phi = 2 * std::numbers::pi * i / (cfg.fan_count - 1);
                const Vec w = std::cos(fan.aperture) * u +
                              std::sin(fan.aperture) * (std::cos(phi) * E.col(0) + std::sin(phi) * E.col(1));
                fan.zetas.push_back(with_dir(w));
            }
        }

        fan.paths.resize(fan.zetas.size());
        TraceOptions o;
        o.ds = cfg.ds;
        o.max_s = cfg.max_s;
        o.reflect = false;
        parallel_for(fan.zetas.size(), [&](std::size_t i) { fan.paths[i] = trace_bichar(m, cfg.x0, fan.zetas[i], o); });
        return fan;
    }

    /// Diameter of the fan's point set at parameter s.
    inline double fan_spread(const Fan& fan, double s)
    {
        std::vector<Vec> pts;
        for (const auto& p : fan.paths)
            pts.push_back(p.at(s).first);
        double m = 0;
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = i + 1; j < pts.size(); ++j)
                m = std::max(m, (pts[i] - pts[j]).norm());
        return m;
    }

    struct FanIntersection
    {
        int fan_a = 0, fan_b = 0;
        int path_a = 0;
        Vec point;
        bool interior = false;
    };

    struct InteriorityReport
    {
        std::vector<FanIntersection> points;
        bool all_interior = false; // false when no intersection was found
    };

    struct CutReport
    {
        std::optional<double> first_conjugate_time;
        std::vector<double> entry; // t0 per path (NaN if never inside)
        std::vector<double> exit;  // tb per path (NaN if never leaves)
    };

    inline CutReport cut_report(const Metric& m, const Fan& fan, const ConjugateOptions& copt = {})
    {
        CutReport rep;
        for (const auto& p : fan.paths)
        {
            rep.entry.push_back(p.entry_time);
            rep.exit.push_back(p.exit_time);
        }
        if (m.dim >= 2 && !m.speed.time_dependent())
            rep.first_conjugate_time =
                conjugate_time(m, fan.config.x0.tail(m.dim), fan.config.xi0.tail(m.dim), copt);
        return rep;
    }

    namespace detail
    {
        /// Segment p + t (q - p), t in [0, 1], against triangle (a, b, c); Moller-Trumbore.
        inline std::optional<Vec> segment_triangle(const Vec& p, const Vec& q, const Vec& a, const Vec& b,
                                                   const Vec& c)
        {
            const Eigen::Vector3d P = p, D = q - p, A = a, E1 = b - a, E2 = c - a;
            const Eigen::Vector3d h = D.cross(E2);
            const double det = E1.dot(h);
            if (std::abs(det) < 1e-300)
                return std::nullopt;
            const Eigen::Vector3d sv = P - A;
            const double u = sv.dot(h) / det;
            if (u < 0 || u > 1)
                return std::nullopt;
            const Eigen::Vector3d qv = sv.cross(E1);
            const double v = D.dot(qv) / det;
            if (v < 0 || u + v > 1)
                return std::nullopt;
            const double t = E2.dot(qv) / det;
            if (t < 0 || t > 1)
                return std::nullopt;
            return Vec(P + t * D);
        }

        inline bool in_window(const BicharPath& p, double t)
        {
            return std::isfinite(p.entry_time) && t > p.entry_time && (!p.exited || t < p.exit_time);
        }
    } // namespace detail

    /// Intersections of every path of one fan with the ruled surface of every
    /// other fan (triangulated between neighbouring paths at equal s), flagged
    /// interior when inside Omega and within the entry/exit window of the
    /// paths involved. Two-dimensional space only.
    inline InteriorityReport fan_interiority(const std::vector<Fan>& fans, const Metric& m, double resample = 4e-3)
    {
        if (m.dim != 2)
            fail(ErrorKind::UnsupportedDim, "fan interiority is implemented for d = 2");
        InteriorityReport rep;
        std::vector<std::vector<std::vector<Vec>>> grid(fans.size());
        for (std::size_t f = 0; f < fans.size(); ++f)
        {
            if (fans[f].paths.size() < 2)
                fail(ErrorKind::SchemaError, "each fan needs at least two paths");
            for (const auto& p : fans[f].paths)
            {
                std::vector<Vec> pts;
                const int K = static_cast<int>(std::ceil((p.s_end() - p.s_begin()) / resample));
                for (int k = 0; k <= K; ++k)
                    pts.push_back(p.at(p.s_begin() + (p.s_end() - p.s_begin()) * k / K).first);
                grid[f].push_back(std::move(pts));
            }
        }
        for (std::size_t fa = 0; fa < fans.size(); ++fa)
            for (std::size_t fb = 0; fb < fans.size(); ++fb)
            {
                if (fa == fb)
                    continue;
                for (std::size_t pa = 0; pa < grid[fa].size(); ++pa)
                {
                    const auto& A = grid[fa][pa];
                    for (std::size_t ka = 0; ka + 1 < A.size(); ++ka)
                    {
                        const double t0 = std::min(A[ka][0], A[ka + 1][0]), t1 = std::max(A[ka][0], A[ka + 1][0]);
                        for (std::size_t pb = 0; pb + 1 < grid[fb].size(); ++pb)
                        {
                            const auto& B0 = grid[fb][pb];
                            const auto& B1 = grid[fb][pb + 1];
                            const std::size_t K = std::min(B0.size(), B1.size());
                            for (std::size_t kb = 0; kb + 1 < K; ++kb)
                            {
                                const double lo = std::min({B0[kb][0], B0[kb + 1][0], B1[kb][0], B1[kb + 1][0]});
                                const double hi = std::max({B0[kb][0], B0[kb + 1][0], B1[kb][0], B1[kb + 1][0]});
                                if (hi < t0 || lo > t1)
                                    continue;
                                auto hit = detail::segment_triangle(A[ka], A[ka + 1], B0[kb], B0[kb + 1], B1[kb + 1]);
                                if (!hit)
                                    hit = detail::segment_triangle(A[ka], A[ka + 1], B0[kb], B1[kb + 1], B1[kb]);
                                if (!hit)
                                    continue;
                                FanIntersection fi;
                                fi.fan_a = static_cast<int>(fa);
                                fi.fan_b = static_cast<int>(fb);
                                fi.path_a = static_cast<int>(pa);
                                fi.point = *hit;
                                const double t = (*hit)[0];
                                fi.interior = m.domain.phi(hit->tail(2)) < 0 &&
                                              detail::in_window(fans[fa].paths[pa], t) &&
                                              detail::in_window(fans[fb].paths[pb], t) &&
                                              detail::in_window(fans[fb].paths[pb + 1], t);
                                rep.points.push_back(std::move(fi));
                            }
                        }
                    }
                }
            }
        rep.all_interior = !rep.points.empty() &&
                           std::all_of(rep.points.begin(), rep.points.end(), [](const auto& p) { return p.interior; });
        return rep;
    }
} // namespace qlw::geo

#endif
