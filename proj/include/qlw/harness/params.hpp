#ifndef QLW_HARNESS_PARAMS_HPP
#define QLW_HARNESS_PARAMS_HPP

// Schema-checked access to a JSON parameter block. Every read records the
// value actually used (defaults included) in an echo; done() rejects keys
// that no read asked for and returns the echo.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qlw/error.hpp"
#include "qlw/harness/report.hpp"

namespace qlw::harness
{
    class Params
    {
    public:
        Params(const Json& j, std::string path) : path_(std::move(path))
        {
            if (!j.is_null() && !j.is_object())
                bad("", "expected an object");
            if (j.is_object())
                src_ = j;
            echo_ = Json::object();
        }

        bool has(const std::string& key) const { return src_.contains(key); }

        double number(const std::string& key, double def, double lo = -kInf, double hi = kInf)
        {
            double v = def;
            if (const Json* j = take(key))
            {
                if (!j->is_number())
                    bad(key, "expected a number");
                v = j->get<double>();
            }
            if (!std::isfinite(v) || v < lo || v > hi)
                bad(key, "value " + detail::format_double(v) + " outside [" + detail::format_double(lo) + ", " +
                             detail::format_double(hi) + "]");
            echo_[key] = v;
            return v;
        }

        /// Strictly positive number.
        double positive(const std::string& key, double def, double hi = kInf)
        {
            const double v = number(key, def, 0.0, hi);
            if (!(v > 0))
                bad(key, "must be positive");
            return v;
        }

        int integer(const std::string& key, int def, int lo = std::numeric_limits<int>::min(),
                    int hi = std::numeric_limits<int>::max())
        {
            long long v = def;
            if (const Json* j = take(key))
            {
                if (!j->is_number_integer())
                    bad(key, "expected an integer");
                v = j->get<long long>();
            }
            if (v < lo || v > hi)
                bad(key, "value " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) +
                             "]");
            echo_[key] = v;
            return static_cast<int>(v);
        }

        bool boolean(const std::string& key, bool def)
        {
            bool v = def;
            if (const Json* j = take(key))
            {
                if (!j->is_boolean())
                    bad(key, "expected true or false");
                v = j->get<bool>();
            }
            echo_[key] = v;
            return v;
        }

        std::string choice(const std::string& key, const std::string& def, const std::vector<std::string>& allowed)
        {
            std::string v = def;
            if (const Json* j = take(key))
            {
                if (!j->is_string())
                    bad(key, "expected a string");
                v = j->get<std::string>();
            }
            if (std::find(allowed.begin(), allowed.end(), v) == allowed.end())
            {
                std::string list;
                for (const auto& a : allowed)
                    list += (list.empty() ? "" : ", ") + a;
                bad(key, "'" + v + "' is not one of " + list);
            }
            echo_[key] = v;
            return v;
        }

        std::vector<double> numbers(const std::string& key, std::vector<double> def, std::size_t min_size = 0,
                                    std::size_t max_size = std::numeric_limits<std::size_t>::max())
        {
            std::vector<double> v = std::move(def);
            if (const Json* j = take(key))
            {
                if (!j->is_array())
                    bad(key, "expected an array of numbers");
                v.clear();
                for (const auto& e : *j)
                {
                    if (!e.is_number())
                        bad(key, "expected an array of numbers");
                    v.push_back(e.get<double>());
                }
            }
            if (v.size() < min_size || v.size() > max_size)
                bad(key, "array length " + std::to_string(v.size()) + " out of range");
            for (double x : v)
                if (!std::isfinite(x))
                    bad(key, "non-finite entry");
            echo_[key] = v;
            return v;
        }

        std::vector<int> integers(const std::string& key, std::vector<int> def, int lo, int hi,
                                  std::size_t min_size = 1)
        {
            std::vector<int> v = std::move(def);
            if (const Json* j = take(key))
            {
                if (!j->is_array())
                    bad(key, "expected an array of integers");
                v.clear();
                for (const auto& e : *j)
                {
                    if (!e.is_number_integer())
                        bad(key, "expected an array of integers");
                    v.push_back(e.get<int>());
                }
            }
            if (v.size() < min_size)
                bad(key, "needs at least " + std::to_string(min_size) + " entries");
            for (int x : v)
                if (x < lo || x > hi)
                    bad(key, "entry " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " +
                                 std::to_string(hi) + "]");
            echo_[key] = v;
            return v;
        }

        /// {"2": 0.5, "3": 0.3}: nonlinearity coefficients keyed by order >= 2.
        std::map<int, double> coefficients(const std::string& key, std::map<int, double> def)
        {
            std::map<int, double> v = std::move(def);
            if (const Json* j = take(key))
            {
                if (!j->is_object())
                    bad(key, "expected an object of order: coefficient");
                v.clear();
                for (const auto& [k, e] : j->items())
                {
                    int m = 0;
                    try
                    {
                        std::size_t pos = 0;
                        m = std::stoi(k, &pos);
                        if (pos != k.size())
                            throw std::invalid_argument(k);
                    }
                    catch (const std::exception&)
                    {
                        bad(key, "order '" + k + "' is not an integer");
                    }
                    if (m < 2 || m > 12)
                        bad(key, "order " + k + " outside [2, 12]");
                    if (!e.is_number() || !std::isfinite(e.get<double>()))
                        bad(key, "coefficient of order " + k + " must be a finite number");
                    v[m] = e.get<double>();
                }
            }
            Json echo = Json::object();
            for (const auto& [m, b] : v)
                echo[std::to_string(m)] = b;
            echo_[key] = echo;
            return v;
        }

        /// Nested object (absent reads as empty, so every default applies).
        Params child(const std::string& key)
        {
            const Json* j = take(key);
            return Params(j ? *j : Json(), path_ + "." + key);
        }

        /// Array of objects.
        std::vector<Params> children(const std::string& key, std::size_t min_size = 0)
        {
            std::vector<Params> out;
            if (const Json* j = take(key))
            {
                if (!j->is_array())
                    bad(key, "expected an array of objects");
                for (std::size_t i = 0; i < j->size(); ++i)
                    out.emplace_back((*j)[i], path_ + "." + key + "[" + std::to_string(i) + "]");
            }
            if (out.size() < min_size)
                bad(key, "needs at least " + std::to_string(min_size) + " entries");
            return out;
        }

        /// Marks key as known and hands back its raw value, or null when absent.
        const Json* raw(const std::string& key) { return take(key); }

        /// Records the echo of a finished child.
        void put(const std::string& key, Json echo) { echo_[key] = std::move(echo); }

        Json done() const
        {
            for (const auto& [k, v] : src_.items())
                if (!used_.count(k))
                    bad(k, "unknown key");
            return echo_;
        }

        [[noreturn]] void bad(const std::string& key, const std::string& what) const
        {
            fail(ErrorKind::SchemaError, path_ + (key.empty() ? "" : "." + key) + ": " + what);
        }

    private:
        static constexpr double kInf = std::numeric_limits<double>::infinity();

        const Json* take(const std::string& key)
        {
            used_.insert(key);
            auto it = src_.find(key);
            return it == src_.end() ? nullptr : &*it;
        }

        Json src_ = Json::object();
        std::string path_;
        Json echo_;
        std::set<std::string> used_;
    };
} // namespace qlw::harness

#endif
