#include "stickel/arith.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace stickel {

std::uint64_t gcd_u64(std::uint64_t a, std::uint64_t b) {
  while (b != 0) {
    std::uint64_t t = a % b;
    a = b;
    b = t;
  }
  return a;
}

std::uint64_t lcm_u64(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  return a / gcd_u64(a, b) * b;
}

std::uint64_t powmod_u64(std::uint64_t base, std::uint64_t exp, std::uint64_t mod) {
  if (mod == 1) return 0;
  unsigned __int128 result = 1;
  unsigned __int128 b = base % mod;
  while (exp > 0) {
    if (exp & 1) result = result * b % mod;
    b = b * b % mod;
    exp >>= 1;
  }
  return static_cast<std::uint64_t>(result);
}

std::uint64_t invmod_u64(std::uint64_t a, std::uint64_t mod) {
  Int inv;
  Int aa(static_cast<unsigned long>(a % mod));
  Int mm(static_cast<unsigned long>(mod));
  if (mpz_invert(inv.get_mpz_t(), aa.get_mpz_t(), mm.get_mpz_t()) == 0) {
    throw InvalidInput("invmod: " + std::to_string(a) + " is not invertible modulo " +
                       std::to_string(mod));
  }
  return inv.get_ui();
}

bool is_prime_u64(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // Deterministic for 64-bit inputs.
  for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    std::uint64_t x = powmod_u64(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = static_cast<std::uint64_t>(static_cast<unsigned __int128>(x) * x % n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

std::vector<std::uint64_t> prime_factors(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      out.push_back(p);
      while (n % p == 0) n /= p;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

std::uint64_t radical(std::uint64_t n) {
  std::uint64_t r = 1;
  for (auto p : prime_factors(n)) r *= p;
  return r;
}

std::uint64_t euler_phi(std::uint64_t n) {
  std::uint64_t r = n;
  for (auto p : prime_factors(n)) r = r / p * (p - 1);
  return r;
}

std::uint64_t multiplicative_order(std::uint64_t a, std::uint64_t n) {
  if (n == 1) return 1;
  if (gcd_u64(a % n, n) != 1) throw InvalidInput("multiplicative_order: not a unit");
  std::uint64_t phi = euler_phi(n);
  std::uint64_t ord = phi;
  for (auto q : prime_factors(phi)) {
    while (ord % q == 0 && powmod_u64(a, ord / q, n) == 1) ord /= q;
  }
  return ord;
}

std::uint64_t least_primitive_root(std::uint64_t p) {
  if (!is_prime_u64(p)) throw InvalidInput("least_primitive_root: modulus is not prime");
  if (p == 2) return 1;
  for (std::uint64_t g = 2; g < p; ++g) {
    if (multiplicative_order(g, p) == p - 1) return g;
  }
  throw InternalInconsistency("no primitive root found");
}

int val_u64(std::uint64_t n, std::uint64_t l) {
  if (n == 0) throw InvalidInput("val_u64: zero has infinite valuation");
  int v = 0;
  while (n % l == 0) {
    n /= l;
    ++v;
  }
  return v;
}

Int ipow(const Int& base, unsigned long exp) {
  Int r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), exp);
  return r;
}

Int mod_floor(const Int& a, const Int& m) {
  Int r;
  mpz_mod(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
  return r;
}

Int binomial(unsigned long n, unsigned long k) {
  Int r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

Rat make_rat(const Int& num, const Int& den) {
  if (den == 0) throw InvalidInput("rational with zero denominator");
  Rat r(num, den);
  r.canonicalize();
  return r;
}

Rat parse_rat(const std::string& text) {
  auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return make_rat(Int(text), 1);
    return make_rat(Int(text.substr(0, slash)), Int(text.substr(slash + 1)));
  } catch (const std::invalid_argument&) {
    throw InvalidInput("malformed rational '" + text + "'");
  }
}

std::string to_string(const Rat& x) { return x.get_str(); }
std::string to_string(const Int& x) { return x.get_str(); }

long padic_val(const Int& x, std::uint64_t l) {
  if (x == 0) throw InvalidInput("padic_val: zero");
  Int ll(static_cast<unsigned long>(l));
  Int t = abs(x);
  long v = 0;
  while (mpz_divisible_p(t.get_mpz_t(), ll.get_mpz_t())) {
    t /= ll;
    ++v;
  }
  return v;
}

std::optional<long> padic_val(const Rat& x, std::uint64_t l) {
  if (x == 0) return std::nullopt;
  return padic_val(Int(x.get_num()), l) - padic_val(Int(x.get_den()), l);
}

Int rat_mod_prime_power(const Rat& x, std::uint64_t l, int k) {
  Int mod = ipow(Int(static_cast<unsigned long>(l)), static_cast<unsigned long>(k));
  Int den(x.get_den());
  Int inv;
  if (mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), mod.get_mpz_t()) == 0) {
    throw InvalidInput("rational " + x.get_str() + " is not " + std::to_string(l) + "-integral");
  }
  return mod_floor(Int(x.get_num()) * inv, mod);
}

// ---------------------------------------------------------------------------

PadicResidue::PadicResidue(Int value, std::uint64_t l, int k) : l_(l), k_(k) {
  if (k < 1) throw InvalidInput("PadicResidue: precision must be >= 1");
  if (l < 2) throw InvalidInput("PadicResidue: bad prime");
  value_ = mod_floor(value, modulus());
}

Int PadicResidue::modulus() const {
  return ipow(Int(static_cast<unsigned long>(l_)), static_cast<unsigned long>(k_));
}

void PadicResidue::check_compatible(const PadicResidue& o) const {
  if (l_ != o.l_ || k_ != o.k_) {
    throw InvalidInput("PadicResidue: mixed (l, k) arithmetic");
  }
}

PadicResidue PadicResidue::operator+(const PadicResidue& o) const {
  check_compatible(o);
  return PadicResidue(value_ + o.value_, l_, k_);
}

PadicResidue PadicResidue::operator-(const PadicResidue& o) const {
  check_compatible(o);
  return PadicResidue(value_ - o.value_, l_, k_);
}

PadicResidue PadicResidue::operator*(const PadicResidue& o) const {
  check_compatible(o);
  return PadicResidue(value_ * o.value_, l_, k_);
}

PadicResidue PadicResidue::pow(const Int& e) const {
  Int mod = modulus();
  Int r;
  if (e < 0) {
    Int inv;
    if (mpz_invert(inv.get_mpz_t(), value_.get_mpz_t(), mod.get_mpz_t()) == 0) {
      throw InvalidInput("PadicResidue: negative power of a non-unit");
    }
    Int ne = -e;
    mpz_powm(r.get_mpz_t(), inv.get_mpz_t(), ne.get_mpz_t(), mod.get_mpz_t());
  } else {
    mpz_powm(r.get_mpz_t(), value_.get_mpz_t(), e.get_mpz_t(), mod.get_mpz_t());
  }
  return PadicResidue(r, l_, k_);
}

bool PadicResidue::operator==(const PadicResidue& o) const {
  return l_ == o.l_ && k_ == o.k_ && value_ == o.value_;
}

int PadicResidue::valuation() const {
  if (value_ == 0) return k_;
  return static_cast<int>(padic_val(value_, l_));
}

PadicResidue teichmuller(const Int& a, std::uint64_t l, int k) {
  Int ll(static_cast<unsigned long>(l));
  if (mpz_divisible_p(a.get_mpz_t(), ll.get_mpz_t())) {
    throw InvalidInput("teichmuller: argument divisible by l");
  }
  PadicResidue x(a, l, k);
  // Each l-th power step gains one digit of agreement with the root of unity.
  for (int i = 1; i < k; ++i) x = x.pow(ll);
  return x;
}

Int eval_poly_mod(const IntPoly& f, const Int& x, const Int& mod) {
  Int acc = 0;
  for (auto it = f.rbegin(); it != f.rend(); ++it) acc = mod_floor(acc * x + *it, mod);
  return acc;
}

IntPoly derivative(const IntPoly& f) {
  IntPoly d;
  for (std::size_t i = 1; i < f.size(); ++i) d.push_back(f[i] * static_cast<unsigned long>(i));
  return d;
}

Int hensel_lift_root(const IntPoly& f, const Int& r0, const Int& p, int N) {
  if (N < 1) throw InvalidInput("hensel_lift_root: precision must be >= 1");
  if (eval_poly_mod(f, r0, p) != 0) throw InvalidInput("hensel_lift_root: r0 is not a root mod p");
  IntPoly df = derivative(f);
  Int dr = eval_poly_mod(df, r0, p);
  if (dr == 0) throw InvalidInput("hensel_lift_root: non-simple root (f'(r0) = 0 mod p)");
  Int r = mod_floor(r0, p);
  int prec = 1;
  while (prec < N) {
    prec = std::min(2 * prec, N);
    Int mod = ipow(p, static_cast<unsigned long>(prec));
    Int fr = eval_poly_mod(f, r, mod);
    Int d = eval_poly_mod(df, r, mod);
    Int inv;
    mpz_invert(inv.get_mpz_t(), d.get_mpz_t(), mod.get_mpz_t());
    r = mod_floor(r - fr * inv, mod);
  }
  return r;
}

// ---------------------------------------------------------------------------

BernoulliCache::BernoulliCache(std::filesystem::path file) : file_(std::move(file)) {}

bool BernoulliCache::load() {
  std::unique_lock lock(mutex_);
  entries_.clear();
  std::ifstream in(file_);
  if (!in) return true;
  std::string line;
  if (!std::getline(in, line) || line != kHeader) return false;
  std::map<unsigned, Rat> parsed;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string n_s, num_s, den_s, extra;
    if (!(fields >> n_s >> num_s >> den_s) || (fields >> extra)) return false;
    try {
      unsigned long n = std::stoul(n_s);
      Int num(num_s), den(den_s);
      if (den <= 0) return false;
      Rat value(num, den);
      value.canonicalize();
      if (value.get_num() != num || value.get_den() != den) return false;
      parsed[static_cast<unsigned>(n)] = value;
    } catch (const std::exception&) {
      return false;
    }
  }
  // Every stored value must agree with the recurrence; recompute to check.
  for (const auto& [n, value] : parsed) {
    if (bernoulli(n) != value) return false;
  }
  entries_ = std::move(parsed);
  return true;
}

void BernoulliCache::save() const {
  std::scoped_lock wlock(write_mutex_);
  std::map<unsigned, Rat> snapshot;
  {
    std::shared_lock lock(mutex_);
    snapshot = entries_;
  }
  if (file_.has_parent_path()) std::filesystem::create_directories(file_.parent_path());
  auto tmp = file_;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << kHeader << '\n';
    for (const auto& [n, value] : snapshot) {
      out << n << ' ' << value.get_num().get_str() << ' ' << value.get_den().get_str() << '\n';
    }
  }
  std::filesystem::rename(tmp, file_);
}

std::optional<Rat> BernoulliCache::get(unsigned n) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(n);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void BernoulliCache::put(unsigned n, const Rat& value) {
  std::unique_lock lock(mutex_);
  entries_[n] = value;
}

std::size_t BernoulliCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::filesystem::path default_cache_dir() {
  if (const char* env = std::getenv("STICKEL_CACHE_DIR"); env && *env) return env;
  if (const char* home = std::getenv("HOME"); home && *home) {
    return std::filesystem::path(home) / ".stickel";
  }
  return ".stickel";
}

namespace {

struct BernoulliTable {
  std::shared_mutex mutex;
  std::vector<Rat> values{Rat(1)};
  std::unique_ptr<BernoulliCache> store;
  bool dirty = false;
};

BernoulliTable& table() {
  static BernoulliTable t;
  return t;
}

}  // namespace

void set_bernoulli_cache_dir(const std::filesystem::path& dir) {
  auto& t = table();
  std::unique_ptr<BernoulliCache> store;
  if (!dir.empty()) {
    store = std::make_unique<BernoulliCache>(dir / "bernoulli.txt");
    if (!store->load()) {
      // Corrupt file: discard it entirely; it is rewritten on the next flush.
      std::error_code ec;
      std::filesystem::remove(store->path(), ec);
    }
  }
  std::unique_lock lock(t.mutex);
  if (store) {
    for (unsigned n = static_cast<unsigned>(t.values.size());; ++n) {
      auto v = store->get(n);
      if (!v) break;
      t.values.push_back(*v);
    }
  }
  t.store = std::move(store);
  t.dirty = false;
}

void flush_bernoulli_cache() {
  auto& t = table();
  std::unique_lock lock(t.mutex);
  if (!t.store || !t.dirty) return;
  for (unsigned n = 0; n < t.values.size(); ++n) t.store->put(n, t.values[n]);
  t.store->save();
  t.dirty = false;
}

Rat bernoulli(unsigned n) {
  auto& t = table();
  {
    std::shared_lock lock(t.mutex);
    if (n < t.values.size()) return t.values[n];
  }
  std::unique_lock lock(t.mutex);
  // Sum_{j=0}^{k} C(k+1, j) B_j = 0.
  for (unsigned k = static_cast<unsigned>(t.values.size()); k <= n; ++k) {
    if (k > 1 && k % 2 == 1) {
      t.values.emplace_back(0);
      continue;
    }
    Rat acc = 0;
    for (unsigned j = 0; j < k; ++j) {
      if (t.values[j] == 0) continue;
      acc += Rat(binomial(k + 1, j)) * t.values[j];
    }
    Rat bk = -acc / Rat(k + 1);
    bk.canonicalize();
    t.values.push_back(bk);
  }
  t.dirty = true;
  return t.values[n];
}

Rat bernoulli_poly(unsigned n, const Rat& x) {
  // Horner in x over sum_j C(n, j) B_j x^(n-j).
  Rat acc = 0;
  for (unsigned j = 0; j <= n; ++j) {
    acc = acc * x + Rat(binomial(n, j)) * bernoulli(j);
  }
  acc.canonicalize();
  return acc;
}

}  // namespace stickel
