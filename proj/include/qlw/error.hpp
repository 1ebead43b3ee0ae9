#ifndef QLW_ERROR_HPP
#define QLW_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace qlw
{
    enum class ErrorKind
    {
        DegenerateAngle,
        NullSum,
        IllConditioned,
        SingularSystem,
        NeedThreeWave,
        BadOrder,
        GridOverflow,
        CflViolation,
        NonFiniteField,
        NoConvergence,
        StencilDiverged,
        NotLightlike,
        TangentialHit,
        UnsupportedMetric,
        NoIntersection,
        DegenerateVelocities,
        Trapped,
        TimeBudget,
        UnsupportedDim,
        SchemaError,
        IoError,
    };

    constexpr std::string_view to_string(ErrorKind k)
    {
        switch (k)
        {
        case ErrorKind::DegenerateAngle: return "DegenerateAngle";
        case ErrorKind::NullSum: return "NullSum";
        case ErrorKind::IllConditioned: return "IllConditioned";
        case ErrorKind::SingularSystem: return "SingularSystem";
        case ErrorKind::NeedThreeWave: return "NeedThreeWave";
        case ErrorKind::BadOrder: return "BadOrder";
        case ErrorKind::GridOverflow: return "GridOverflow";
        case ErrorKind::CflViolation: return "CflViolation";
        case ErrorKind::NonFiniteField: return "NonFiniteField";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::StencilDiverged: return "StencilDiverged";
        case ErrorKind::NotLightlike: return "NotLightlike";
        case ErrorKind::TangentialHit: return "TangentialHit";
        case ErrorKind::UnsupportedMetric: return "UnsupportedMetric";
        case ErrorKind::NoIntersection: return "NoIntersection";
        case ErrorKind::DegenerateVelocities: return "DegenerateVelocities";
        case ErrorKind::Trapped: return "Trapped";
        case ErrorKind::TimeBudget: return "TimeBudget";
        case ErrorKind::UnsupportedDim: return "UnsupportedDim";
        case ErrorKind::SchemaError: return "SchemaError";
        case ErrorKind::IoError: return "IoError";
        }
        return "Unknown";
    }

    /// Every failure raised by the library carries a machine-readable kind.
    class Error : public std::runtime_error
    {
    public:
        Error(ErrorKind kind, const std::string& what)
            : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
        {}

        ErrorKind kind() const noexcept { return kind_; }

    private:
        ErrorKind kind_;
    };

    [[noreturn]] inline void fail(ErrorKind kind, const std::string& what)
    {
        throw Error(kind, what);
    }
} // namespace qlw

#endif
