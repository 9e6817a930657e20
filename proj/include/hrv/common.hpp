#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace hrv {

/// Pipeline error with a machine-parsable category ("io", "data", "config",
/// "train", "internal"). The CLI prints "error:<category>: <message>".
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& message)
        : std::runtime_error(message), category_(std::move(category)) {}
    const std::string& category() const { return category_; }

private:
    std::string category_;
};

[[noreturn]] inline void fail(const std::string& category, const std::string& message) {
    throw Error(category, message);
}

/// Shortest decimal representation that round-trips the double exactly.
std::string format_double(double v);

/// Fixed-precision formatting for SVG coordinates and labels.
std::string format_fixed(double v, int digits);

/// Runs fn(i) for i in [0, n), striped over up to n_threads workers.
/// n_threads == 0 uses hardware concurrency. Results must be written to
/// pre-sized slots indexed by i so parallel and serial runs agree.
void parallel_for(std::size_t n, int n_threads, const std::function<void(std::size_t)>& fn);

/// FNV-1a 64-bit hash, used to derive stable per-row RNG streams.
std::uint64_t fnv1a64(const std::string& s);

}  // namespace hrv
