#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

namespace qsync {

/// Applies fn to every input on up to `jobs` worker threads. Results keep
/// input order; the exception of the lowest failing index is rethrown.
template <class In, class Fn>
auto parallel_map(const std::vector<In>& inputs, int jobs, Fn fn) {
    using Out = decltype(fn(inputs.front()));
    std::vector<std::optional<Out>> slots(inputs.size());
    std::vector<std::exception_ptr> errors(inputs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < inputs.size(); i = next++) {
            try {
                slots[i].emplace(fn(inputs[i]));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int workers = std::clamp<int>(jobs, 1, static_cast<int>(std::max<std::size_t>(1, inputs.size())));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    std::vector<Out> out;
    out.reserve(inputs.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

}  // namespace qsync
