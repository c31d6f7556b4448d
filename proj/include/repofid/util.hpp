#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace repofid {

// Bad input data (malformed files, impossible requests). CLI maps this to exit 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad invocation (unknown names, inconsistent flags). CLI maps this to exit 1.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

uint64_t fnv1a64(std::string_view data);

// Combines a user seed with a stream identifier (e.g. a path hash) so that
// per-item random streams are independent of processing order.
uint64_t mix_seed(uint64_t seed, uint64_t stream);

// Deterministic splitmix64-based generator. Unlike the standard library
// distributions, every draw here is fully specified, so seeded results are
// identical across platforms and compilers.
class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next();

    // Uniform integer in [0, n). n must be > 0.
    uint64_t below(uint64_t n);

    // Uniform double in [0, 1).
    double unit();

    // Standard normal via Box-Muller.
    double normal();

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (size_t i = items.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    // Sorted indices of a uniform k-subset of [0, n).
    std::vector<size_t> sample_indices(size_t n, size_t k);

  private:
    uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

bool is_valid_utf8(std::string_view data);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

std::string_view rstrip(std::string_view text);

// Splits on '\n'. A trailing newline does not produce an empty final line.
std::vector<std::string_view> split_lines(std::string_view text);

}  // namespace repofid
