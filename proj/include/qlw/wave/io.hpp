#ifndef QLW_WAVE_IO_HPP
#define QLW_WAVE_IO_HPP

// CSV and compact binary persistence of fields and traces.
// Binary layout (little-endian): "QLWF", u32 dims, u32 nx, u32 nt, f64 dt,
// f64 x0, f64 x1, then (nt + 1) * (nx + 1) f64 values, one row per time level.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "qlw/error.hpp"
#include "qlw/wave/field.hpp"

namespace qlw::wave
{
    namespace detail
    {
        template <typename U>
        U to_little(U v)
        {
            if constexpr (std::endian::native == std::endian::big)
            {
                unsigned char b[sizeof(U)];
                std::memcpy(b, &v, sizeof(U));
                for (std::size_t i = 0; i < sizeof(U) / 2; ++i)
                    std::swap(b[i], b[sizeof(U) - 1 - i]);
                std::memcpy(&v, b, sizeof(U));
            }
            return v;
        }

        inline void put_u32(std::ostream& os, std::uint32_t v)
        {
            v = to_little(v);
            os.write(reinterpret_cast<const char*>(&v), sizeof v);
        }

        inline void put_f64(std::ostream& os, double d)
        {
            std::uint64_t v = to_little(std::bit_cast<std::uint64_t>(d));
            os.write(reinterpret_cast<const char*>(&v), sizeof v);
        }

        inline std::uint32_t get_u32(std::istream& is)
        {
            std::uint32_t v = 0;
            is.read(reinterpret_cast<char*>(&v), sizeof v);
            return to_little(v);
        }

        inline double get_f64(std::istream& is)
        {
            std::uint64_t v = 0;
            is.read(reinterpret_cast<char*>(&v), sizeof v);
            return std::bit_cast<double>(to_little(v));
        }

        inline std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out)
        {
            std::ofstream os(path, mode);
            if (!os)
                fail(ErrorKind::IoError, "cannot open " + path + " for writing");
            return os;
        }
    } // namespace detail

    inline void write_binary(const WaveField& f, const std::string& path)
    {
        auto os = detail::open_out(path, std::ios::out | std::ios::binary);
        os.write("QLWF", 4);
        detail::put_u32(os, static_cast<std::uint32_t>(f.grid.spatial_dim));
        detail::put_u32(os, static_cast<std::uint32_t>(f.grid.nx));
        detail::put_u32(os, static_cast<std::uint32_t>(f.grid.nt()));
        detail::put_f64(os, f.grid.dt);
        detail::put_f64(os, f.grid.x0);
        detail::put_f64(os, f.grid.x1);
        for (double v : f.values)
            detail::put_f64(os, v);
        if (!os)
            fail(ErrorKind::IoError, "short write to " + path);
    }

    /// Reads values and grid; the speed is not part of the layout and is left empty.
    inline WaveField read_binary(const std::string& path)
    {
        std::ifstream is(path, std::ios::binary);
        if (!is)
            fail(ErrorKind::IoError, "cannot open " + path);
        char magic[4];
        is.read(magic, 4);
        if (!is || std::memcmp(magic, "QLWF", 4) != 0)
            fail(ErrorKind::IoError, path + " is not a field file");
        WaveField f;
        f.grid.spatial_dim = static_cast<int>(detail::get_u32(is));
        f.grid.nx = static_cast<int>(detail::get_u32(is));
        const auto nt = detail::get_u32(is);
        f.grid.dt = detail::get_f64(is);
        f.grid.x0 = detail::get_f64(is);
        f.grid.x1 = detail::get_f64(is);
        f.grid.T = nt * f.grid.dt;
        f.values.resize(static_cast<std::size_t>(nt + 1) * (f.grid.nx + 1));
        for (double& v : f.values)
            v = detail::get_f64(is);
        if (!is)
            fail(ErrorKind::IoError, "truncated field file " + path);
        return f;
    }

    /// One row per time level: t, p(x_0), ..., p(x_nx).
    inline void write_csv(const WaveField& f, const std::string& path)
    {
        auto os = detail::open_out(path);
        os << std::setprecision(17) << "t";
        for (int j = 0; j <= f.grid.nx; ++j)
            os << ",x" << j;
        os << '\n';
        for (int n = 0; n <= f.grid.nt(); ++n)
        {
            os << f.grid.t(n);
            for (int j = 0; j <= f.grid.nx; ++j)
                os << ',' << f.at(n, j);
            os << '\n';
        }
    }

    inline void write_csv(const BoundaryTrace& b, const std::string& path)
    {
        auto os = detail::open_out(path);
        os << std::setprecision(17) << "t,left,right\n";
        for (std::size_t n = 0; n < b.left.size(); ++n)
            os << n * b.dt << ',' << b.left[n] << ',' << b.right[n] << '\n';
    }
} // namespace qlw::wave

#endif
