#ifndef QLW_GEOMETRY_INTERSECTION_HPP
#define QLW_GEOMETRY_INTERSECTION_HPP

// Common point of several traced paths by Gauss-Newton over (s_1..s_n, q),
// followed by a rank test on the normalised velocities at q.

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/SVD>

#include "qlw/error.hpp"
#include "qlw/geometry/bichar.hpp"

namespace qlw::geo
{
    struct IntersectionOptions
    {
        double tol = 1e-8;      // max distance of gamma_j(s_j) from q
        double rank_tol = 1e-8; // singular values relative to the largest
        bool require_independent = true;
        int max_iter = 100;
    };

    struct Intersection
    {
        Vec q;
        std::vector<double> params;
        bool independent = false;
        double residual = 0;
        Vec singular_values;
    };

    inline Intersection regular_intersection(const std::vector<BicharPath>& paths, const IntersectionOptions& opt = {})
    {
        const std::size_t np = paths.size();
        if (np < 2)
            fail(ErrorKind::SchemaError, "need at least two paths");
        const Eigen::Index n = paths[0].samples.front().x.size();
        for (const auto& p : paths)
            if (p.samples.empty() || p.samples.front().x.size() != n)
                fail(ErrorKind::SchemaError, "paths must be non-empty and of one dimension");
        if (static_cast<Eigen::Index>(np) > n)
            fail(ErrorKind::SchemaError, "more paths than spacetime dimensions");

        // brute-force start: sample of path 0 closest to all other paths
        std::vector<double> s(np);
        {
            const auto stride = [](const BicharPath& p) { return std::max<std::size_t>(1, p.samples.size() / 2000); };
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < paths[0].samples.size(); i += stride(paths[0]))
            {
                const Vec& x = paths[0].samples[i].x;
                double total = 0;
                std::vector<double> cand(np);
                cand[0] = paths[0].samples[i].s;
                for (std::size_t j = 1; j < np && total < best; ++j)
                {
                    double m = std::numeric_limits<double>::infinity();
                    for (std::size_t k = 0; k < paths[j].samples.size(); k += stride(paths[j]))
                    {
                        const double dd = (paths[j].samples[k].x - x).squaredNorm();
                        if (dd < m)
                        {
                            m = dd;
                            cand[j] = paths[j].samples[k].s;
                        }
                    }
                    total += m;
                }
                if (total < best)
                {
                    best = total;
                    s = cand;
                }
            }
        }

        Vec q = Vec::Zero(n);
        for (std::size_t j = 0; j < np; ++j)
            q += paths[j].at(s[j]).first / static_cast<double>(np);

        const Eigen::Index rows = static_cast<Eigen::Index>(np) * n, cols = static_cast<Eigen::Index>(np) + n;
        double lambda = 1e-6;
        auto residual_of = [&](const std::vector<double>& sv, const Vec& qv) {
            Vec r(rows);
            for (std::size_t j = 0; j < np; ++j)
                r.segment(static_cast<Eigen::Index>(j) * n, n) = paths[j].at(sv[j]).first - qv;
            return r;
        };
        Vec r = residual_of(s, q);
        for (int it = 0; it < opt.max_iter && r.norm() > 1e-15; ++it)
        {
            Mat J = Mat::Zero(rows, cols);
            for (std::size_t j = 0; j < np; ++j)
            {
                const auto blk = static_cast<Eigen::Index>(j) * n;
                J.block(blk, static_cast<Eigen::Index>(j), n, 1) = paths[j].at(s[j]).second;
                J.block(blk, static_cast<Eigen::Index>(np), n, n) = -Mat::Identity(n, n);
            }
            // Levenberg-Marquardt step
            const Mat A = J.transpose() * J + lambda * Mat::Identity(cols, cols);
            const Vec step = A.ldlt().solve(-J.transpose() * r);
            std::vector<double> s_new(np);
            for (std::size_t j = 0; j < np; ++j)
                s_new[j] = std::clamp(s[j] + step[static_cast<Eigen::Index>(j)], paths[j].s_begin(), paths[j].s_end());
            const Vec q_new = q + step.tail(n);
            const Vec r_new = residual_of(s_new, q_new);
            if (r_new.norm() < r.norm())
            {
                s = s_new;
                q = q_new;
                const double gain = r.norm() - r_new.norm();
                r = r_new;
                lambda = std::max(lambda / 10, 1e-15);
                if (gain < 1e-16 * std::max(1.0, q.norm()))
                    break;
            }
            else
            {
                lambda *= 10;
                if (lambda > 1e8)
                    break;
            }
        }

        Intersection out;
        out.q = q;
        out.params = s;
        for (std::size_t j = 0; j < np; ++j)
            out.residual = std::max(out.residual, r.segment(static_cast<Eigen::Index>(j) * n, n).norm());
        if (!(out.residual <= opt.tol))
            fail(ErrorKind::NoIntersection, "paths stay " + std::to_string(out.residual) + " apart");

        Mat V(n, static_cast<Eigen::Index>(np));
        for (std::size_t j = 0; j < np; ++j)
            V.col(static_cast<Eigen::Index>(j)) = paths[j].at(s[j]).second.normalized();
        Eigen::JacobiSVD<Mat> svd(V);
        out.singular_values = svd.singularValues();
        out.independent = out.singular_values.minCoeff() > opt.rank_tol * out.singular_values.maxCoeff();
        if (opt.require_independent && !out.independent)
            fail(ErrorKind::DegenerateVelocities, "velocities at the intersection are linearly dependent");
        return out;
    }
} // namespace qlw::geo

#endif
