#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace cascadia {

std::uint64_t splitmix64(std::uint64_t x);

// Derives an independent stream seed from a master seed and up to two keys
// (cell indices, thread ordinals, ...). Same inputs, same seed, everywhere.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

// Deterministic RNG. std::mt19937_64 output is fixed by the standard; the
// draw helpers below avoid std::*_distribution, whose mapping from engine
// output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }
  std::uint64_t next_below(std::uint64_t n);  // uniform in [0, n), n > 0
  double next_unit();                         // uniform in [0, 1)
  double next_exp(double rate);               // exponential waiting time
  double next_range(double lo, double hi);    // uniform in [lo, hi)

 private:
  std::mt19937_64 eng_;
};

// Thread-count resolution: explicit request > CASCADIA_THREADS > hardware.
unsigned resolve_thread_count(unsigned requested);

// Runs chunk(begin, end) over [0, n) split across `threads` workers.
// Exceptions from workers are re-thrown on the calling thread.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& chunk);

// FNV-1a 64-bit content digest (audit trail, not cryptographic).
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::string fnv1a64_hex(const std::string& bytes);

// Every floating value written by the tool goes through this: 6 significant
// digits, stable across runs.
std::string format_num(double v);

// Round-trip precision for model files and other reloadable artifacts.
std::string format_full(double v);

std::string read_file(const std::string& path);
void atomic_write_file(const std::string& path, const std::string& content);

std::string csv_escape(const std::string& field);
std::vector<std::string> csv_split(const std::string& line);

std::string to_lower(std::string s);
std::string trim(const std::string& s);

}  // namespace cascadia
