#ifndef QLW_PARALLEL_HPP
#define QLW_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace qlw
{
    inline constexpr const char* kWorkersEnv = "QLW_WORKERS";

    /// Worker count: QLW_WORKERS if set and positive, else the hardware count.
    inline int worker_count()
    {
        if (const char* env = std::getenv(kWorkersEnv))
        {
            try
            {
                const int n = std::stoi(env);
                if (n > 0)
                    return n;
            }
            catch (...)
            {
            }
        }
        return std::max(1u, std::thread::hardware_concurrency());
    }

    /// Runs fn(i) for i in [0, n) on up to `workers` threads. The first
    /// exception thrown by any task is rethrown after all threads join.
    template <typename Fn>
    void parallel_for(std::size_t n, Fn&& fn, int workers = worker_count())
    {
        const std::size_t nw = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
        if (nw <= 1)
        {
            for (std::size_t i = 0; i < n; ++i)
                fn(i);
            return;
        }
        std::atomic<std::size_t> next{0};
        std::exception_ptr err;
        std::mutex err_mutex;
        std::vector<std::thread> pool;
        pool.reserve(nw);
        for (std::size_t w = 0; w < nw; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++)
                {
                    try
                    {
                        fn(i);
                    }
                    catch (...)
                    {
                        std::lock_guard lock(err_mutex);
                        if (!err)
                            err = std::current_exception();
                    }
                }
            });
        for (auto& t : pool)
            t.join();
        if (err)
            std::rethrow_exception(err);
    }
} // namespace qlw

#endif
