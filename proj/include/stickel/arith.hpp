#pragma once

// Exact rational, modular and l-adic kernels.

#include <gmpxx.h>

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace stickel {

using Int = mpz_class;
using Rat = mpq_class;

/// Raised when an operation's precondition is violated by the caller.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when two independently computed quantities disagree.
class InternalInconsistency : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// ---------------------------------------------------------------------------
// Small-integer number theory helpers.

std::uint64_t gcd_u64(std::uint64_t a, std::uint64_t b);
std::uint64_t lcm_u64(std::uint64_t a, std::uint64_t b);
std::uint64_t powmod_u64(std::uint64_t base, std::uint64_t exp, std::uint64_t mod);
std::uint64_t invmod_u64(std::uint64_t a, std::uint64_t mod);
bool is_prime_u64(std::uint64_t n);
/// Distinct prime factors in increasing order.
std::vector<std::uint64_t> prime_factors(std::uint64_t n);
std::uint64_t radical(std::uint64_t n);
std::uint64_t euler_phi(std::uint64_t n);
/// Least primitive root modulo a prime p.
std::uint64_t least_primitive_root(std::uint64_t p);
/// Multiplicative order of a modulo n (gcd(a, n) = 1).
std::uint64_t multiplicative_order(std::uint64_t a, std::uint64_t n);
/// v_l(n) for n != 0.
int val_u64(std::uint64_t n, std::uint64_t l);
Int ipow(const Int& base, unsigned long exp);
/// Least non-negative residue of a mod m.
Int mod_floor(const Int& a, const Int& m);
Int binomial(unsigned long n, unsigned long k);

/// Rational from numerator/denominator, canonicalized; rejects zero denominator.
Rat make_rat(const Int& num, const Int& den);
/// Parses "a" or "a/b".
Rat parse_rat(const std::string& text);
std::string to_string(const Rat& x);
std::string to_string(const Int& x);

/// l-adic valuation; std::nullopt stands for +infinity (x = 0).
std::optional<long> padic_val(const Rat& x, std::uint64_t l);
long padic_val(const Int& x, std::uint64_t l);

/// Residue of an l-integral rational modulo l^k.
Int rat_mod_prime_power(const Rat& x, std::uint64_t l, int k);

// ---------------------------------------------------------------------------

/// An element of Z/l^k with both l and k carried along.
class PadicResidue {
 public:
  PadicResidue(Int value, std::uint64_t l, int k);

  const Int& value() const { return value_; }
  std::uint64_t prime() const { return l_; }
  int precision() const { return k_; }
  Int modulus() const;

  PadicResidue operator+(const PadicResidue& o) const;
  PadicResidue operator-(const PadicResidue& o) const;
  PadicResidue operator*(const PadicResidue& o) const;
  PadicResidue pow(const Int& e) const;
  bool operator==(const PadicResidue& o) const;
  bool is_zero() const { return value_ == 0; }
  /// v_l of the residue, capped at k.
  int valuation() const;

 private:
  void check_compatible(const PadicResidue& o) const;

  Int value_;
  std::uint64_t l_;
  int k_;
};

/// Teichmuller lift of a modulo l^k, computed as a^(l^(k-1)) mod l^k.
PadicResidue teichmuller(const Int& a, std::uint64_t l, int k);

/// Integer polynomial, coefficients in increasing degree.
using IntPoly = std::vector<Int>;
Int eval_poly_mod(const IntPoly& f, const Int& x, const Int& mod);
IntPoly derivative(const IntPoly& f);

/// Unique lift r = r0 mod p with f(r) = 0 mod p^N. Throws InvalidInput for a
/// non-root or a multiple root.
Int hensel_lift_root(const IntPoly& f, const Int& r0, const Int& p, int N);

// ---------------------------------------------------------------------------
// Bernoulli numbers (B_1 = -1/2).

/// Persistent store of Bernoulli numbers. File format: a header line
/// "stickel-bernoulli v1" followed by records "n numerator denominator".
/// A single malformed or inconsistent record invalidates the whole file.
class BernoulliCache {
 public:
  static constexpr const char* kHeader = "stickel-bernoulli v1";

  explicit BernoulliCache(std::filesystem::path file);

  /// Reads the backing file. Returns false (and empties the cache) when the
  /// file is corrupt; a missing file is not an error.
  bool load();
  /// Writes all entries atomically (temp file + rename).
  void save() const;

  std::optional<Rat> get(unsigned n) const;
  void put(unsigned n, const Rat& value);
  std::size_t size() const;
  const std::filesystem::path& path() const { return file_; }

 private:
  std::filesystem::path file_;
  mutable std::shared_mutex mutex_;
  mutable std::mutex write_mutex_;
  std::map<unsigned, Rat> entries_;
};

/// Default cache directory: $STICKEL_CACHE_DIR, else $HOME/.stickel, else
/// ./.stickel.
std::filesystem::path default_cache_dir();

/// Attaches a persistent cache to the process-wide Bernoulli table. Passing
/// an empty path detaches it.
void set_bernoulli_cache_dir(const std::filesystem::path& dir);
/// Flushes newly computed values to the attached persistent cache, if any.
void flush_bernoulli_cache();

Rat bernoulli(unsigned n);
Rat bernoulli_poly(unsigned n, const Rat& x);

}  // namespace stickel
