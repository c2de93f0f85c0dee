#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

namespace pme {

template <typename Job>
auto parallel_map(std::size_t count, std::size_t threads, Job&& job)
    -> std::vector<decltype(job(std::size_t{}))> {
    using Result = decltype(job(std::size_t{}));
    std::vector<std::optional<Result>> slots(count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t j = next.fetch_add(1); j < count; j = next.fetch_add(1)) {
            try {
                slots[j].emplace(job(j));
            } catch (...) {
                errors[j] = std::current_exception();
            }
        }
    };

    const std::size_t n_workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_workers);
        for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    }

    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    std::vector<Result> out;
    out.reserve(count);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

}  // namespace pme
