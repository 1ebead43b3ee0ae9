#ifndef QLW_INTERACTION_HPP
#define QLW_INTERACTION_HPP

// Interaction coefficients of three and four colliding lightlike covectors.
//
// All sums over Σ(3) / Σ(4) run over every ordered permutation of the index
// set (6 resp. 24 terms). With that reading the printed groupings such as
// D1 = 3·4·(2 S12 + S14 + S23 + 2 S24) are reproduced exactly.

#include <algorithm>
#include <array>
#include <map>
#include <string>

#include "qlw/error.hpp"
#include "qlw/lightcone.hpp"

namespace qlw
{
    /// Coefficients beta_m of F(x, p) = sum_m beta_m d_t^2 (p^m), m >= 2.
    struct NonlinearityProfile
    {
        std::map<int, double> betas;

        NonlinearityProfile() = default;
        NonlinearityProfile(std::initializer_list<std::pair<const int, double>> init) : betas(init)
        {
            for (const auto& [m, b] : betas)
                if (m < 2)
                    fail(ErrorKind::BadOrder, "nonlinearity orders start at 2");
        }

        /// beta2, beta3, beta4 shorthand
        static NonlinearityProfile lower(double b2, double b3, double b4)
        {
            return NonlinearityProfile{{2, b2}, {3, b3}, {4, b4}};
        }

        double operator[](int m) const
        {
            auto it = betas.find(m);
            return it == betas.end() ? 0.0 : it->second;
        }

        void set(int m, double b)
        {
            if (m < 2)
                fail(ErrorKind::BadOrder, "nonlinearity orders start at 2");
            betas[m] = b;
        }

        int truncation() const { return betas.empty() ? 1 : betas.rbegin()->first; }

        bool is_zero() const
        {
            return std::all_of(betas.begin(), betas.end(), [](const auto& kv) { return kv.second == 0.0; });
        }
    };

    /// Pair ratios S_ij and triple ratios R_ijk of four covectors, evaluated once.
    template <typename T>
    struct RatioTable
    {
        std::array<std::array<T, 4>, 4> S{};
        std::array<std::array<std::array<T, 4>, 4>, 4> R{};

        explicit RatioTable(const std::array<Covector4<T>, 4>& z)
        {
            for (int i = 0; i < 4; ++i)
                for (int j = i + 1; j < 4; ++j)
                    S[i][j] = S[j][i] = pair_ratio(z[i], z[j]);
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    for (int k = 0; k < 4; ++k)
                        if (i < j && j < k)
                        {
                            const T r = triple_ratio(z[i], z[j], z[k]);
                            int idx[3] = {i, j, k};
                            std::sort(idx, idx + 3);
                            do
                                R[idx[0]][idx[1]][idx[2]] = r;
                            while (std::next_permutation(idx, idx + 3));
                        }
        }
    };

    /// Calls f(i, j, k, l) for all 24 orderings of {0, 1, 2, 3}.
    template <typename F>
    void for_each_permutation4(F&& f)
    {
        std::array<int, 4> p{0, 1, 2, 3};
        do
            f(p[0], p[1], p[2], p[3]);
        while (std::next_permutation(p.begin(), p.end()));
    }

    template <typename F>
    void for_each_permutation3(F&& f)
    {
        std::array<int, 3> p{0, 1, 2};
        do
            f(p[0], p[1], p[2]);
        while (std::next_permutation(p.begin(), p.end()));
    }

    template <typename T>
    T coeff_C(const std::array<Covector4<T>, 4>& z)
    {
        const RatioTable<T> t(z);
        T sum = 0;
        for_each_permutation4([&](int i, int j, int k, int l) {
            sum += (4 * t.R[i][j][k] + t.S[i][l]) * t.S[j][k];
        });
        return sum;
    }

    template <typename T>
    T coeff_C(const QuadrupleConfig<T>& q)
    {
        return coeff_C(q.parts);
    }

    template <typename T>
    T coeff_D(const std::array<Covector4<T>, 4>& z)
    {
        const RatioTable<T> t(z);
        T sum = 0;
        for_each_permutation4([&](int i, int j, int k, int l) { sum += 3 * t.S[k][l] + 2 * t.R[i][j][k]; });
        return sum;
    }

    template <typename T>
    T coeff_D(const QuadrupleConfig<T>& q)
    {
        return coeff_D(q.parts);
    }

    /// The two sub-sums of D: D1 from the pair ratios, D2 from the triple ratios.
    template <typename T>
    std::pair<T, T> coeff_D_split(const QuadrupleConfig<T>& q)
    {
        const RatioTable<T> t(q.parts);
        T d1 = 0, d2 = 0;
        for_each_permutation4([&](int i, int j, int k, int l) {
            d1 += 3 * t.S[k][l];
            d2 += 2 * t.R[i][j][k];
        });
        return {d1, d2};
    }

    /// C1 (triple-ratio part) and C2 (pair-pair part) of C.
    template <typename T>
    std::pair<T, T> coeff_C_split(const QuadrupleConfig<T>& q)
    {
        const RatioTable<T> t(q.parts);
        T c1 = 0, c2 = 0;
        for_each_permutation4([&](int i, int j, int k, int l) {
            c1 += 4 * t.R[i][j][k] * t.S[j][k];
            c2 += t.S[i][l] * t.S[j][k];
        });
        return {c1, c2};
    }

    /// Three-wave coefficient: sum over the 6 orderings of
    /// 2 beta2^2 S_jk - beta3 (so beta2 = 0 gives -6 beta3).
    template <typename T>
    T coeff_Q3(const std::array<Covector4<T>, 3>& z, double beta2, double beta3)
    {
        std::array<std::array<T, 3>, 3> s{};
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j)
                s[i][j] = s[j][i] = pair_ratio(z[i], z[j]);
        const T b2 = T(beta2), b3 = T(beta3);
        T sum = 0;
        for_each_permutation3([&](int, int j, int k) { sum += 2 * s[j][k] * b2 * b2 - b3; });
        return sum;
    }

    template <typename T>
    struct InteractionCoeffs
    {
        T C{};
        T D{};
        /// sum over Σ(4) of (zeta0)^-2 times each of the four displayed parts
        std::array<T, 4> parts{};

        T total() const { return parts[0] + parts[1] + parts[2] + parts[3]; }
    };

    /// Evaluates the four-wave coefficient part by part: every permutation
    /// contributes (zeta0)^-2 (C1 + C2 + C3 + C4) with
    ///   C1 = -2 beta2 zeta0^2 R_ijk (2 S_jk beta2^2 - beta3)
    ///   C2 = -beta2^3 zeta0^2 S_ij S_kl
    ///   C3 = 3 beta3 beta2 zeta0^2 S_kl
    ///   C4 = -beta4 zeta0^2
    template <typename T>
    InteractionCoeffs<T> interaction_coeffs(const QuadrupleConfig<T>& q, const NonlinearityProfile& beta)
    {
        const RatioTable<T> t(q.parts);
        const T b2 = T(beta[2]), b3 = T(beta[3]), b4 = T(beta[4]);
        Covector4<T> zeta = q.parts[0] + q.parts[1] + q.parts[2] + q.parts[3];
        const T z0sq = zeta[0] * zeta[0];

        InteractionCoeffs<T> out;
        for_each_permutation4([&](int i, int j, int k, int l) {
            const T c1 = -2 * b2 * z0sq * t.R[i][j][k] * (2 * t.S[j][k] * b2 * b2 - b3);
            const T c2 = -b2 * b2 * b2 * z0sq * t.S[i][j] * t.S[k][l];
            const T c3 = 3 * b3 * b2 * z0sq * t.S[k][l];
            const T c4 = -b4 * z0sq;
            out.parts[0] += c1 / z0sq;
            out.parts[1] += c2 / z0sq;
            out.parts[2] += c3 / z0sq;
            out.parts[3] += c4 / z0sq;
        });
        out.C = coeff_C(q);
        out.D = coeff_D(q);
        return out;
    }

    /// Full four-wave coefficient from the part formulas. The beta4 part is
    /// counted once per permutation, i.e. -24 beta4.
    template <typename T>
    T coeff_parts(const QuadrupleConfig<T>& q, const NonlinearityProfile& beta)
    {
        return interaction_coeffs(q, beta).total();
    }

    /// A synthetic symbol-level measurement. All symbol, trace and (2 pi)
    /// prefactors are normalised to one.
    template <typename T = double>
    struct Measurement
    {
        T value{};
        std::array<int, 4> order_pattern{1, 1, 1, 1};
        std::string config_id;
        double theta = 0.0;
        double phi = 0.0;
        T C{};
        T D{};
    };

    /// value = -C beta2^3 + D beta2 beta3 - beta4 (the 24 copies of beta4 are
    /// absorbed into the normalisation).
    template <typename T>
    Measurement<T> measurement_oracle(const NonlinearityProfile& beta, const QuadrupleConfig<T>& q,
                                      std::string config_id = {})
    {
        Measurement<T> m;
        m.C = coeff_C(q);
        m.D = coeff_D(q);
        const T b2 = T(beta[2]), b3 = T(beta[3]), b4 = T(beta[4]);
        m.value = -m.C * b2 * b2 * b2 + m.D * b2 * b3 - b4;
        m.config_id = std::move(config_id);
        m.theta = to_double(q.theta);
        m.phi = to_double(q.phi);
        return m;
    }

    /// Three-wave measurement for the beta2 = 0 branch of the recovery.
    template <typename T>
    Measurement<T> three_wave_oracle(const NonlinearityProfile& beta, const std::array<Covector4<T>, 3>& z,
                                     std::string config_id = {})
    {
        Measurement<T> m;
        m.value = coeff_Q3(z, beta[2], beta[3]);
        m.order_pattern = {1, 1, 1, 0};
        m.config_id = std::move(config_id);
        return m;
    }
} // namespace qlw

#endif
