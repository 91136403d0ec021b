#include "stickel/cyclotomic.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <sstream>

namespace stickel {

namespace {

IntPoly poly_mul(const IntPoly& a, const IntPoly& b) {
  IntPoly r(a.size() + b.size() - 1, Int(0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  }
  return r;
}

// Exact division by a monic polynomial.
IntPoly poly_div_exact(IntPoly a, const IntPoly& b) {
  std::size_t db = b.size() - 1;
  if (a.size() < b.size()) throw InternalInconsistency("poly_div_exact: degree");
  IntPoly q(a.size() - db, Int(0));
  for (std::size_t i = a.size(); i-- > db;) {
    Int c = a[i];
    q[i - db] = c;
    if (c == 0) continue;
    for (std::size_t j = 0; j <= db; ++j) a[i - db + j] -= c * b[j];
  }
  for (std::size_t i = 0; i < db; ++i) {
    if (a[i] != 0) throw InternalInconsistency("poly_div_exact: nonzero remainder");
  }
  return q;
}

int mobius(std::uint64_t n) {
  int mu = 1;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      n /= p;
      if (n % p == 0) return 0;
      mu = -mu;
    }
  }
  if (n > 1) mu = -mu;
  return mu;
}

IntPoly cyclotomic_poly(std::uint64_t m) {
  IntPoly num{Int(1)};
  std::vector<IntPoly> dens;
  for (std::uint64_t d = 1; d <= m; ++d) {
    if (m % d != 0) continue;
    int mu = mobius(m / d);
    if (mu == 0) continue;
    IntPoly f(d + 1, Int(0));
    f[0] = -1;
    f[d] = 1;
    if (mu == 1) {
      num = poly_mul(num, f);
    } else {
      dens.push_back(f);
    }
  }
  for (const auto& f : dens) num = poly_div_exact(num, f);
  return num;
}

}  // namespace

std::shared_ptr<const CycloContext> CycloContext::get(std::uint64_t m) {
  static std::mutex mu;
  static std::map<std::uint64_t, std::shared_ptr<const CycloContext>> cache;
  if (m == 0) throw InvalidInput("cyclotomic modulus must be positive");
  std::scoped_lock lock(mu);
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;
  auto ctx = std::make_shared<CycloContext>();
  ctx->m = m;
  ctx->cyclotomic = cyclotomic_poly(m);
  ctx->phi = ctx->cyclotomic.size() - 1;
  std::size_t phi = ctx->phi;
  std::vector<long> cur(phi, 0);
  cur[0] = 1;
  if (phi == 1) cur[0] = 1;
  for (std::uint64_t j = 0; j < m; ++j) {
    ctx->xpow.push_back(cur);
    // Multiply by x and reduce with the monic Phi_m.
    long top = cur[phi - 1];
    for (std::size_t i = phi - 1; i > 0; --i) cur[i] = cur[i - 1];
    cur[0] = 0;
    if (top != 0) {
      for (std::size_t i = 0; i < phi; ++i) cur[i] -= top * ctx->cyclotomic[i].get_si();
    }
  }
  cache.emplace(m, ctx);
  return ctx;
}

// ---------------------------------------------------------------------------

CycloInt::CycloInt(std::uint64_t m) : ctx_(CycloContext::get(m)), c_(ctx_->phi, Int(0)) {}

CycloInt::CycloInt(std::uint64_t m, std::vector<Int> coeffs) : ctx_(CycloContext::get(m)), c_(std::move(coeffs)) {
  if (c_.size() != ctx_->phi) {
    throw InvalidInput("CycloInt for m = " + std::to_string(m) + " needs " + std::to_string(ctx_->phi) +
                       " coefficients");
  }
}

CycloInt CycloInt::from_int(std::uint64_t m, const Int& c) {
  CycloInt x(m);
  x.c_[0] = c;
  return x;
}

CycloInt CycloInt::from_exponents(std::uint64_t m, const std::vector<Int>& c) {
  CycloInt x(m);
  const auto& ctx = *x.ctx_;
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (c[j] == 0) continue;
    const auto& row = ctx.xpow[j % m];
    for (std::size_t k = 0; k < ctx.phi; ++k) {
      if (row[k] == 0) continue;
      if (row[k] > 0) {
        mpz_addmul_ui(x.c_[k].get_mpz_t(), c[j].get_mpz_t(), static_cast<unsigned long>(row[k]));
      } else {
        mpz_submul_ui(x.c_[k].get_mpz_t(), c[j].get_mpz_t(), static_cast<unsigned long>(-row[k]));
      }
    }
  }
  return x;
}

CycloInt CycloInt::zeta_power(std::uint64_t m, long e) {
  long mm = static_cast<long>(m);
  std::vector<Int> c(m, Int(0));
  c[static_cast<std::size_t>(((e % mm) + mm) % mm)] = 1;
  return from_exponents(m, c);
}

CycloInt CycloInt::operator+(const CycloInt& o) const {
  if (modulus() != o.modulus()) throw InvalidInput("CycloInt modulus mismatch");
  CycloInt r(*this);
  for (std::size_t i = 0; i < c_.size(); ++i) r.c_[i] += o.c_[i];
  return r;
}

CycloInt CycloInt::operator-() const {
  CycloInt r(*this);
  for (auto& c : r.c_) c = -c;
  return r;
}

CycloInt CycloInt::operator-(const CycloInt& o) const { return *this + (-o); }

CycloInt CycloInt::operator*(const CycloInt& o) const {
  if (modulus() != o.modulus()) throw InvalidInput("CycloInt modulus mismatch");
  std::uint64_t m = modulus();
  std::vector<Int> acc(m, Int(0));
  for (std::size_t i = 0; i < c_.size(); ++i) {
    if (c_[i] == 0) continue;
    for (std::size_t j = 0; j < o.c_.size(); ++j) {
      if (o.c_[j] == 0) continue;
      mpz_addmul(acc[(i + j) % m].get_mpz_t(), c_[i].get_mpz_t(), o.c_[j].get_mpz_t());
    }
  }
  return from_exponents(m, acc);
}

CycloInt CycloInt::scaled(const Int& c) const {
  CycloInt r(*this);
  for (auto& x : r.c_) x *= c;
  return r;
}

CycloInt CycloInt::pow(unsigned long e) const {
  CycloInt result = from_int(modulus(), 1);
  CycloInt base(*this);
  while (e > 0) {
    if (e & 1) result = result * base;
    e >>= 1;
    if (e) base = base * base;
  }
  return result;
}

bool CycloInt::is_zero() const {
  return std::all_of(c_.begin(), c_.end(), [](const Int& c) { return c == 0; });
}

std::optional<Int> CycloInt::as_integer() const {
  for (std::size_t i = 1; i < c_.size(); ++i) {
    if (c_[i] != 0) return std::nullopt;
  }
  return c_[0];
}

Int CycloInt::content() const {
  Int g = 0;
  for (const auto& c : c_) g = gcd(g, c);
  return g;
}

CycloInt CycloInt::divided_by(const Int& d) const {
  if (d == 0) throw InvalidInput("division by zero");
  CycloInt r(*this);
  for (auto& c : r.c_) {
    if (!mpz_divisible_p(c.get_mpz_t(), d.get_mpz_t())) throw InvalidInput("CycloInt not divisible by " + d.get_str());
    mpz_divexact(c.get_mpz_t(), c.get_mpz_t(), d.get_mpz_t());
  }
  return r;
}

CycloInt CycloInt::galois(std::uint64_t c) const {
  std::uint64_t m = modulus();
  if (gcd_u64(c % m, m) != 1 && m > 1) throw InvalidInput("sigma_" + std::to_string(c) + " needs c prime to m");
  std::vector<Int> acc(m, Int(0));
  for (std::size_t i = 0; i < c_.size(); ++i) {
    if (c_[i] == 0) continue;
    acc[static_cast<std::size_t>(static_cast<unsigned __int128>(i) * c % m)] += c_[i];
  }
  return from_exponents(m, acc);
}

Int CycloInt::norm() const {
  std::uint64_t m = modulus();
  CycloInt prod = from_int(m, 1);
  for (std::uint64_t c = 1; c <= std::max<std::uint64_t>(m, 1); ++c) {
    if (gcd_u64(c % m, m) != 1 && m > 1) continue;
    if (m <= 2 && c > 1) break;
    prod = prod * galois(c);
  }
  auto v = prod.as_integer();
  if (!v) throw InternalInconsistency("norm is not a rational integer");
  return *v;
}

Int CycloInt::eval_mod(const Int& r, const Int& mod) const {
  Int acc = 0;
  for (std::size_t i = c_.size(); i-- > 0;) acc = mod_floor(acc * r + c_[i], mod);
  return acc;
}

Json CycloInt::to_json() const {
  Json j;
  j["modulus"] = std::to_string(modulus());
  Json cs = Json::array();
  for (const auto& c : c_) cs.push_back(c.get_str());
  j["coeffs"] = cs;
  return j;
}

CycloInt CycloInt::from_json(const Json& j) {
  try {
    std::uint64_t m = std::stoull(j.at("modulus").get<std::string>());
    std::vector<Int> c;
    for (const auto& x : j.at("coeffs")) c.emplace_back(x.get<std::string>());
    return CycloInt(m, std::move(c));
  } catch (const InvalidInput&) {
    throw;
  } catch (const std::exception& e) {
    throw InvalidInput(std::string("malformed cyclotomic integer: ") + e.what());
  }
}

std::string CycloInt::to_string() const {
  std::ostringstream out;
  bool first = true;
  for (std::size_t i = 0; i < c_.size(); ++i) {
    if (c_[i] == 0) continue;
    Int a = abs(c_[i]);
    bool neg = c_[i] < 0;
    if (first) {
      out << (neg ? "-" : "");
    } else {
      out << (neg ? " - " : " + ");
    }
    if (i == 0) {
      out << a;
    } else {
      if (a != 1) out << a << "*";
      out << "z";
      if (i > 1) out << "^" << i;
    }
    first = false;
  }
  if (first) out << "0";
  return out.str();
}

// ---------------------------------------------------------------------------

CycloFrac::CycloFrac(CycloInt num, Int den) : num_(std::move(num)), den_(std::move(den)) {
  if (den_ == 0) throw InvalidInput("zero denominator");
  if (den_ < 0) {
    den_ = -den_;
    num_ = -num_;
  }
  normalize();
}

void CycloFrac::normalize() {
  if (num_.is_zero()) {
    den_ = 1;
    return;
  }
  Int g = gcd(num_.content(), den_);
  if (g > 1) {
    num_ = num_.divided_by(g);
    den_ /= g;
  }
}

CycloFrac CycloFrac::operator*(const CycloFrac& o) const { return CycloFrac(num_ * o.num_, den_ * o.den_); }

CycloFrac CycloFrac::galois(std::uint64_t c) const { return CycloFrac(num_.galois(c), den_); }

CycloFrac CycloFrac::pow(unsigned long e) const {
  return CycloFrac(num_.pow(e), ipow(den_, e));
}

bool CycloFrac::operator==(const CycloFrac& o) const {
  return num_.modulus() == o.num_.modulus() && num_ == o.num_ && den_ == o.den_;
}

bool CycloFrac::is_one() const {
  auto v = num_.as_integer();
  return v && *v == den_;
}

Rat CycloFrac::norm() const {
  std::uint64_t phi = CycloContext::get(modulus())->phi;
  return make_rat(num_.norm(), ipow(den_, phi));
}

Json CycloFrac::to_json() const {
  Json j = num_.to_json();
  j["den"] = den_.get_str();
  return j;
}

CycloFrac CycloFrac::from_json(const Json& j) {
  CycloInt n = CycloInt::from_json(j);
  Int d = j.contains("den") ? Int(j.at("den").get<std::string>()) : Int(1);
  return CycloFrac(n, d);
}

// ---------------------------------------------------------------------------

std::shared_ptr<const DlogTable> DlogTable::get(std::uint64_t p) {
  static std::mutex mu;
  static std::map<std::uint64_t, std::shared_ptr<const DlogTable>> cache;
  {
    std::scoped_lock lock(mu);
    auto it = cache.find(p);
    if (it != cache.end()) return it->second;
  }
  if (!is_prime_u64(p)) throw InvalidInput(std::to_string(p) + " is not prime");
  if (p > (1ULL << 32)) throw InvalidInput("discrete-log tables are limited to p < 2^32");
  auto t = std::make_shared<DlogTable>();
  t->p = p;
  t->g = least_primitive_root(p);
  t->dlog.assign(p, 0);
  std::uint64_t x = 1;
  for (std::uint64_t e = 0; e + 1 < p; ++e) {
    t->dlog[x] = static_cast<std::uint32_t>(e);
    x = x * t->g % p;
  }
  std::scoped_lock lock(mu);
  return cache.emplace(p, t).first->second;
}

ResidueCharacter::ResidueCharacter(std::uint64_t p, std::uint64_t m, std::uint64_t u) : m_(m), u_(m ? u % m : 0) {
  if (m < 1) throw InvalidInput("character order must be positive");
  if (!is_prime_u64(p)) throw InvalidInput(std::to_string(p) + " is not prime");
  if ((p - 1) % m != 0) {
    throw InvalidInput("p = " + std::to_string(p) + " is not 1 mod " + std::to_string(m));
  }
  table_ = DlogTable::get(p);
}

std::optional<std::uint64_t> ResidueCharacter::exponent(std::uint64_t x) const {
  x %= table_->p;
  if (x == 0) return std::nullopt;
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(table_->dlog[x] % m_) * u_ % m_);
}

std::optional<std::uint64_t> ResidueCharacter::exponent(const Int& x) const {
  return exponent(mod_floor(x, Int(static_cast<unsigned long>(table_->p))).get_ui());
}

ResidueCharacter ResidueCharacter::pow(long k) const {
  long mm = static_cast<long>(m_);
  long e = ((k % mm) + mm) % mm;
  return ResidueCharacter(p(), m_, static_cast<std::uint64_t>(static_cast<unsigned __int128>(u_) * e % m_));
}

std::uint64_t ResidueCharacter::order() const { return u_ == 0 ? 1 : m_ / gcd_u64(u_, m_); }

std::uint64_t ResidueCharacter::attached_root() const {
  if (order() != m_) throw InvalidInput("attached prime needs a character of exact order m");
  std::uint64_t p = table_->p;
  std::uint64_t h = powmod_u64(table_->g, (p - 1) / m_, p);
  // The Gauss sum of chi lives above the prime where chi(x) = x^{-(p-1)/m}.
  std::uint64_t uinv = m_ == 1 ? 0 : invmod_u64(u_, m_);
  return powmod_u64(invmod_u64(h, p), uinv, p);
}

std::vector<std::uint64_t> cyclotomic_roots_mod(std::uint64_t m, std::uint64_t p) {
  if (!is_prime_u64(p)) throw InvalidInput(std::to_string(p) + " is not prime");
  if (m <= 2) return {m == 1 ? 1 % p : p - 1};
  if ((p - 1) % m != 0) {
    throw InvalidInput("prime " + std::to_string(p) + " does not split completely in Q(mu_" + std::to_string(m) + ")");
  }
  auto t = DlogTable::get(p);
  std::uint64_t h = powmod_u64(t->g, (p - 1) / m, p);
  std::vector<std::uint64_t> out;
  for (std::uint64_t c = 1; c < m; ++c) {
    if (gcd_u64(c, m) == 1) out.push_back(powmod_u64(h, c, p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Jacobi sums with a memo table and an optional text file behind it.

namespace {

constexpr const char* kJacobiHeader = "stickel-jacobi v1";

using JacobiKey = std::tuple<std::uint64_t, std::uint64_t, std::uint64_t, std::uint64_t>;

struct JacobiStore {
  std::shared_mutex mutex;
  std::map<JacobiKey, std::vector<Int>> values;
  std::filesystem::path file;
  bool dirty = false;
};

JacobiStore& jacobi_store() {
  static JacobiStore s;
  return s;
}

CycloInt compute_jacobi(const ResidueCharacter& a, const ResidueCharacter& b) {
  std::uint64_t p = a.p();
  std::uint64_t m = a.m();
  std::vector<long> counts(m, 0);
  for (std::uint64_t x = 2; x < p; ++x) {
    auto e1 = a.exponent(x);
    auto e2 = b.exponent(p + 1 - x);
    counts[(*e1 + *e2) % m] += 1;
  }
  std::vector<Int> c(m);
  for (std::size_t i = 0; i < m; ++i) c[i] = counts[i];
  return CycloInt::from_exponents(m, c);
}

bool load_jacobi_file(const std::filesystem::path& file, std::map<JacobiKey, std::vector<Int>>& out) {
  std::ifstream in(file);
  if (!in) return true;
  std::string line;
  if (!std::getline(in, line) || line != kJacobiHeader) return false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::uint64_t m = 0, p = 0, u1 = 0, u2 = 0;
    if (!(fields >> m >> p >> u1 >> u2)) return false;
    try {
      auto ctx = CycloContext::get(m);
      std::vector<Int> c;
      std::string tok;
      while (fields >> tok) c.emplace_back(tok);
      if (c.size() != ctx->phi) return false;
      // Every record must be a genuine Jacobi sum of norm p^{phi/2}.
      CycloInt j(m, c);
      if (ctx->phi % 2 == 0 && j.norm() != ipow(Int(static_cast<unsigned long>(p)), ctx->phi / 2)) return false;
      out[{m, p, u1, u2}] = std::move(c);
    } catch (const std::exception&) {
      return false;
    }
  }
  return true;
}

}  // namespace

void set_jacobi_cache_dir(const std::filesystem::path& dir) {
  auto& s = jacobi_store();
  std::map<JacobiKey, std::vector<Int>> loaded;
  std::filesystem::path file;
  if (!dir.empty()) {
    file = dir / "jacobi.txt";
    if (!load_jacobi_file(file, loaded)) {
      loaded.clear();
      std::error_code ec;
      std::filesystem::remove(file, ec);
    }
  }
  std::unique_lock lock(s.mutex);
  for (auto& [k, v] : loaded) s.values.emplace(k, std::move(v));
  s.file = file;
  s.dirty = false;
}

void flush_jacobi_cache() {
  auto& s = jacobi_store();
  std::unique_lock lock(s.mutex);
  if (s.file.empty() || !s.dirty) return;
  if (s.file.has_parent_path()) std::filesystem::create_directories(s.file.parent_path());
  auto tmp = s.file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << kJacobiHeader << '\n';
    for (const auto& [k, v] : s.values) {
      out << std::get<0>(k) << ' ' << std::get<1>(k) << ' ' << std::get<2>(k) << ' ' << std::get<3>(k);
      for (const auto& c : v) out << ' ' << c.get_str();
      out << '\n';
    }
  }
  std::filesystem::rename(tmp, s.file);
  s.dirty = false;
}

std::size_t jacobi_cache_size() {
  auto& s = jacobi_store();
  std::shared_lock lock(s.mutex);
  return s.values.size();
}

CycloInt jacobi_sum(const ResidueCharacter& chi1, const ResidueCharacter& chi2) {
  if (chi1.p() != chi2.p() || chi1.m() != chi2.m()) throw InvalidInput("Jacobi sum of characters of different (p, m)");
  if (chi1.is_trivial() || chi2.is_trivial() || (chi1.u() + chi2.u()) % chi1.m() == 0) {
    throw InvalidInput("Jacobi sum with a trivial character among chi1, chi2, chi1*chi2");
  }
  JacobiKey key{chi1.m(), chi1.p(), chi1.u(), chi2.u()};
  auto& s = jacobi_store();
  {
    std::shared_lock lock(s.mutex);
    auto it = s.values.find(key);
    if (it != s.values.end()) return CycloInt(chi1.m(), it->second);
  }
  CycloInt j = compute_jacobi(chi1, chi2);
  std::unique_lock lock(s.mutex);
  s.values.emplace(key, j.coeffs());
  s.dirty = true;
  return j;
}

// ---------------------------------------------------------------------------

FiniteDivisor FiniteDivisor::prime(std::uint64_t m, std::uint64_t p, std::uint64_t r) {
  FiniteDivisor d(m);
  d.add(p, r, 1);
  return d;
}

void FiniteDivisor::add(std::uint64_t p, std::uint64_t r, const Int& mult) {
  if (mult == 0) return;
  Key k{p, r % p};
  auto& v = terms_[k];
  v += mult;
  if (v == 0) terms_.erase(k);
}

FiniteDivisor FiniteDivisor::operator+(const FiniteDivisor& o) const {
  if (m_ != o.m_) throw InvalidInput("divisor modulus mismatch");
  FiniteDivisor r(*this);
  for (const auto& [k, v] : o.terms_) r.add(k.first, k.second, v);
  return r;
}

FiniteDivisor FiniteDivisor::scaled(const Int& c) const {
  FiniteDivisor r(m_);
  for (const auto& [k, v] : terms_) r.add(k.first, k.second, v * c);
  return r;
}

FiniteDivisor FiniteDivisor::operator-(const FiniteDivisor& o) const { return *this + o.scaled(-1); }

Int FiniteDivisor::degree_at(std::uint64_t p) const {
  Int s = 0;
  for (const auto& [k, v] : terms_) {
    if (k.first == p) s += v;
  }
  return s;
}

FiniteDivisor FiniteDivisor::galois(std::uint64_t c) const {
  FiniteDivisor r(m_);
  std::uint64_t cinv = m_ <= 2 ? 1 : invmod_u64(c % m_, m_);
  for (const auto& [k, v] : terms_) r.add(k.first, powmod_u64(k.second, cinv, k.first), v);
  return r;
}

FiniteDivisor FiniteDivisor::act(const GroupRingElement& x) const {
  const auto& g = *x.group();
  if (g.modulus() != m_ || g.order() != euler_phi(m_)) {
    throw InvalidInput("divisor action needs an element of Z[(Z/" + std::to_string(m_) + ")^x]");
  }
  if (!x.domain().is_rational() || !x.has_integer_coeffs()) throw InvalidInput("divisor action needs integral coefficients");
  FiniteDivisor r(m_);
  for (std::size_t s = 0; s < x.size(); ++s) {
    if (x.rat(s) == 0) continue;
    r = r + galois(g.rep(s)).scaled(Int(x.rat(s).get_num()));
  }
  return r;
}

FiniteDivisor FiniteDivisor::trace_to(std::uint64_t m_f) const {
  if (m_f == 0 || m_ % m_f != 0) throw InvalidInput("trace target must divide the modulus");
  FiniteDivisor r(m_f);
  for (const auto& [k, v] : terms_) r.add(k.first, powmod_u64(k.second, m_ / m_f, k.first), v);
  return r;
}

Json FiniteDivisor::to_json() const {
  Json arr = Json::array();
  for (const auto& [k, v] : terms_) {
    Json t;
    t["p"] = std::to_string(k.first);
    t["r"] = std::to_string(k.second);
    t["mult"] = v.get_str();
    arr.push_back(t);
  }
  return arr;
}

std::string FiniteDivisor::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream out;
  bool first = true;
  for (const auto& [k, v] : terms_) {
    out << (first ? "" : " + ") << v << "*(" << k.first << "," << k.second << ")";
    first = false;
  }
  return out.str();
}

FiniteDivisor principal_divisor(const CycloFrac& alpha, const std::vector<std::uint64_t>& support) {
  std::uint64_t m = alpha.modulus();
  auto ctx = CycloContext::get(m);
  if (alpha.num().is_zero()) throw InvalidInput("divisor of zero");
  std::set<std::uint64_t> primes(support.begin(), support.end());
  Int nnum = alpha.num().norm();
  Int nden = ipow(alpha.den(), ctx->phi);
  // The norm must be supported on the listed primes.
  Int rest_num = abs(nnum), rest_den = nden;
  for (auto p : primes) {
    if (!is_prime_u64(p)) throw InvalidInput(std::to_string(p) + " is not prime");
    if (m > 2 && (p - 1) % m != 0) {
      throw InvalidInput("support prime " + std::to_string(p) + " does not split in Q(mu_" + std::to_string(m) + ")");
    }
    Int pz(static_cast<unsigned long>(p));
    while (mpz_divisible_p(rest_num.get_mpz_t(), pz.get_mpz_t())) rest_num /= pz;
    while (mpz_divisible_p(rest_den.get_mpz_t(), pz.get_mpz_t())) rest_den /= pz;
  }
  if (rest_num != 1 || rest_den != 1) {
    throw InvalidInput("norm of alpha is not supported on the listed primes");
  }
  FiniteDivisor d(m);
  for (auto p : primes) {
    Int pz(static_cast<unsigned long>(p));
    long vnorm = padic_val(nnum, p);
    long vden = padic_val(alpha.den(), p);
    auto roots = cyclotomic_roots_mod(m, p);
    int N = static_cast<int>(1 + 2 * vnorm);
    std::vector<long> vals;
    for (;;) {
      vals.clear();
      bool conclusive = true;
      Int mod = ipow(pz, static_cast<unsigned long>(N));
      for (auto r : roots) {
        Int rhat = hensel_lift_root(ctx->cyclotomic, Int(static_cast<unsigned long>(r)), pz, N);
        Int val = alpha.num().eval_mod(rhat, mod);
        if (val == 0) {
          conclusive = false;
          break;
        }
        vals.push_back(padic_val(val, p));
      }
      if (conclusive) break;
      if (N >= 1024) throw InternalInconsistency("valuation needs more than p^1024 precision");
      N = std::min(2 * N, 1024);
    }
    long total = 0;
    for (std::size_t i = 0; i < roots.size(); ++i) {
      total += vals[i];
      d.add(p, roots[i], Int(vals[i] - vden));
    }
    if (total != vnorm) {
      throw InternalInconsistency("local valuations at " + std::to_string(p) + " sum to " + std::to_string(total) +
                                  " but the norm has valuation " + std::to_string(vnorm));
    }
  }
  return d;
}

FiniteDivisor principal_divisor(const CycloInt& alpha, const std::vector<std::uint64_t>& support) {
  return principal_divisor(CycloFrac(alpha), support);
}

// ---------------------------------------------------------------------------

Json BrumerStarkElement::to_json() const {
  Json j;
  j["value"] = value.to_json();
  j["b"] = std::to_string(b);
  j["m"] = std::to_string(m);
  j["p"] = std::to_string(p);
  j["r"] = std::to_string(r);
  j["u"] = std::to_string(u);
  j["up_to_root_of_unity"] = up_to_root_of_unity;
  if (!up_to_root_of_unity) {
    j["twist"] = {{"sign", std::to_string(twist_sign)}, {"t", std::to_string(twist_t)}};
  }
  Json f = Json::array();
  for (const auto& s : factors) f.push_back(s);
  j["factors"] = f;
  return j;
}

CycloInt gauss_ratio(std::uint64_t b, const ResidueCharacter& chi, std::vector<std::string>* factors) {
  if (chi.is_trivial()) throw InvalidInput("gauss_ratio needs a nontrivial character");
  if (b < 2) throw InvalidInput("b must be at least 2");
  std::uint64_t m = chi.m();
  std::uint64_t p = chi.p();
  CycloInt prod = CycloInt::from_int(m, 1);
  auto sign_exp = chi.exponent(p - 1);  // chi(-1) = zeta^e
  for (std::uint64_t i = 1; i < b; ++i) {
    auto ci = chi.pow(static_cast<long>(i));
    auto ci1 = chi.pow(static_cast<long>(i + 1));
    if (ci.is_trivial()) {
      prod = -prod;
      if (factors) factors->push_back("-1");
    } else if (ci1.is_trivial()) {
      // g(chi) g(chi^{-1}) / g(1) = -chi(-1) p
      CycloInt f = CycloInt::zeta_power(m, static_cast<long>(*sign_exp)).scaled(-Int(static_cast<unsigned long>(p)));
      prod = prod * f;
      if (factors) factors->push_back("-chi(-1)*p");
    } else {
      prod = prod * jacobi_sum(chi, ci);
      if (factors) factors->push_back("J(chi,chi^" + std::to_string(i) + ")");
    }
  }
  return prod;
}

namespace {

Int field_roots_of_unity(std::uint64_t m) { return roots_of_unity_order(*AbelianGaloisGroup::make(m)); }

GroupPtr full_group(std::uint64_t m) {
  static std::mutex mu;
  static std::map<std::uint64_t, GroupPtr> cache;
  std::scoped_lock lock(mu);
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;
  return cache.emplace(m, AbelianGaloisGroup::make(m)).first->second;
}

CycloFrac conj_frac(const CycloFrac& x) { return x.galois(x.modulus() - 1); }

}  // namespace

BrumerStarkElement bs_element(std::uint64_t b, const ResidueCharacter& chi) {
  std::uint64_t m = chi.m();
  std::uint64_t p = chi.p();
  if (m < 3) throw InvalidInput("Brumer-Stark elements need m >= 3");
  if (chi.order() != m) throw InvalidInput("character must have exact order m");
  Int w = field_roots_of_unity(m);
  if (gcd(Int(static_cast<unsigned long>(b)), w) != 1) {
    throw InvalidInput("b = " + std::to_string(b) + " is not coprime to w_F = " + w.get_str());
  }
  if (b % p == 0) throw InvalidInput("b must be prime to p");
  BrumerStarkElement out{CycloFrac(CycloInt(m)), b, m, p, chi.attached_root(), chi.u(), true, 0, 0, {}};
  // g(chi')^b / g(chi'^b) has divisor Theta_0 sigma_b w' when chi' belongs to
  // w', so evaluate it at chi' = chi^{1/b}.
  auto shifted = chi.pow(static_cast<long>(invmod_u64(b % m, m)));
  CycloInt ratio = gauss_ratio(b, shifted, &out.factors);
  out.value = CycloFrac(ratio, ipow(Int(static_cast<unsigned long>(p)), (b - 1) / 2));
  if (!(out.value * conj_frac(out.value)).is_one()) {
    throw InternalInconsistency("lambda^{1+j} != 1 for m = " + std::to_string(m) + ", p = " + std::to_string(p));
  }
  return out;
}

BsVerification verify_bs_value(const CycloFrac& value, const BrumerStarkElement& datum) {
  auto g = full_group(datum.m);
  auto th = theta(g, 0, datum.b, datum.m);
  BsVerification v{false, principal_divisor(value, {datum.p}),
                   FiniteDivisor::prime(datum.m, datum.p, datum.r).act(th.element), FiniteDivisor(datum.m)};
  v.diff = v.divisor - v.expected;
  v.ok = v.diff.is_zero();
  return v;
}

BsVerification verify_bs(const BrumerStarkElement& lambda) { return verify_bs_value(lambda.value, lambda); }

namespace {

struct Twist {
  int sign;
  std::uint64_t t;
  CycloInt mu;
};

std::vector<Twist> roots_of_unity(std::uint64_t m) {
  std::vector<Twist> out;
  for (int s = 0; s < (m % 2 ? 2 : 1); ++s) {
    for (std::uint64_t t = 0; t < m; ++t) {
      CycloInt mu = CycloInt::zeta_power(m, static_cast<long>(t));
      if (s) mu = -mu;
      out.push_back({s, t, mu});
    }
  }
  return out;
}

}  // namespace

BrumerStarkElement bs_congruence_normalize(const BrumerStarkElement& lambda) {
  std::uint64_t b = lambda.b;
  if (!is_prime_u64(b)) throw InvalidInput("congruence normalization needs b prime");
  std::uint64_t m = lambda.m;
  Int bz(static_cast<unsigned long>(b));
  bool split = (b - 1) % m == 0;
  std::vector<std::uint64_t> broots;
  if (split) broots = cyclotomic_roots_mod(m, b);
  std::vector<const Twist*> passing;
  auto twists = roots_of_unity(m);
  std::ostringstream residues;
  for (const auto& tw : twists) {
    CycloInt x = tw.mu * lambda.value.num() - CycloInt::from_int(m, lambda.value.den());
    bool ok = std::all_of(x.coeffs().begin(), x.coeffs().end(),
                          [&](const Int& c) { return mpz_divisible_p(c.get_mpz_t(), bz.get_mpz_t()); });
    if (split) {
      bool ok2 = true;
      for (auto s : broots) ok2 = ok2 && x.eval_mod(Int(static_cast<unsigned long>(s)), bz) == 0;
      if (ok2 != ok) throw InternalInconsistency("congruence test disagrees between embeddings and residue ring");
    }
    if (ok) passing.push_back(&tw);
  }
  if (passing.size() != 1) {
    std::string msg = passing.empty() ? "no root-of-unity twist of lambda is 1 mod b"
                                      : "several root-of-unity twists of lambda are 1 mod b";
    throw InternalInconsistency(msg + " (m = " + std::to_string(m) + ", p = " + std::to_string(lambda.p) +
                                ", b = " + std::to_string(b) + ")");
  }
  BrumerStarkElement out(lambda);
  out.value = CycloFrac(passing[0]->mu, 1) * lambda.value;
  out.up_to_root_of_unity = false;
  out.twist_sign = passing[0]->sign;
  out.twist_t = passing[0]->t;
  if (!(out.value * conj_frac(out.value)).is_one()) throw InternalInconsistency("normalized lambda^{1+j} != 1");
  return out;
}

std::optional<std::pair<int, std::uint64_t>> root_of_unity_ratio(const CycloFrac& x, const CycloFrac& y) {
  if (x.modulus() != y.modulus()) throw InvalidInput("modulus mismatch");
  CycloInt lhs = x.num().scaled(y.den());
  CycloInt base = y.num().scaled(x.den());
  for (const auto& tw : roots_of_unity(x.modulus())) {
    if (tw.mu * base == lhs) return std::make_pair(tw.sign, tw.t);
  }
  return std::nullopt;
}

EquivarianceResult galois_equivariance_check(const BrumerStarkElement& lambda, std::uint64_t c) {
  std::uint64_t m = lambda.m;
  if (gcd_u64(c % m, m) != 1) throw InvalidInput("c must be prime to m");
  ResidueCharacter moved(lambda.p, m, static_cast<std::uint64_t>(static_cast<unsigned __int128>(lambda.u) * c % m));
  BrumerStarkElement other = bs_element(lambda.b, moved);
  if (!lambda.up_to_root_of_unity) other = bs_congruence_normalize(other);
  CycloFrac moved_value = lambda.value.galois(c);
  EquivarianceResult r;
  r.element_equal = moved_value == other.value;
  r.twist = root_of_unity_ratio(moved_value, other.value);
  auto d1 = principal_divisor(lambda.value, {lambda.p}).galois(c);
  auto d2 = principal_divisor(other.value, {lambda.p});
  std::uint64_t cinv = invmod_u64(c % m, m);
  r.divisor_equal = d1 == d2 && other.r == powmod_u64(lambda.r, cinv, lambda.p);
  return r;
}

bool hecke_multiplicativity_check(std::uint64_t b, std::uint64_t m, std::uint64_t p1, std::uint64_t p2) {
  auto l1 = bs_element(b, ResidueCharacter(p1, m));
  auto l2 = bs_element(b, ResidueCharacter(p2, m));
  std::vector<std::uint64_t> support{p1};
  if (p2 != p1) support.push_back(p2);
  auto d = principal_divisor(l1.value * l2.value, support);
  auto th = theta(full_group(m), 0, b, m);
  auto w = FiniteDivisor::prime(m, p1, l1.r) + FiniteDivisor::prime(m, p2, l2.r);
  return d == w.act(th.element);
}

CycloInt norm_to_subfield(const CycloInt& alpha, std::uint64_t m_f) {
  std::uint64_t m_e = alpha.modulus();
  if (m_f == 0 || m_e % m_f != 0) throw InvalidInput("subfield modulus must divide the field modulus");
  if (m_f == m_e) return alpha;
  CycloInt prod = CycloInt::from_int(m_e, 1);
  for (std::uint64_t c = 1; c < m_e; ++c) {
    if (gcd_u64(c, m_e) == 1 && c % m_f == 1 % m_f) prod = prod * alpha.galois(c);
  }
  // Solve prod = sum_j beta_j zeta_E^{j d}, j < phi(m_F), over Q.
  auto ctx_f = CycloContext::get(m_f);
  std::size_t nf = ctx_f->phi;
  std::size_t ne = CycloContext::get(m_e)->phi;
  std::uint64_t d = m_e / m_f;
  std::vector<std::vector<Rat>> a(ne, std::vector<Rat>(nf + 1));
  for (std::size_t j = 0; j < nf; ++j) {
    auto col = CycloInt::zeta_power(m_e, static_cast<long>(j * d));
    for (std::size_t i = 0; i < ne; ++i) a[i][j] = Rat(col.coeffs()[i]);
  }
  for (std::size_t i = 0; i < ne; ++i) a[i][nf] = Rat(prod.coeffs()[i]);
  std::size_t row = 0;
  std::vector<std::size_t> pivot_row(nf, ne);
  for (std::size_t col = 0; col < nf; ++col) {
    std::size_t piv = row;
    while (piv < ne && a[piv][col] == 0) ++piv;
    if (piv == ne) throw InternalInconsistency("subfield basis is degenerate");
    std::swap(a[piv], a[row]);
    Rat inv = 1 / a[row][col];
    for (auto& x : a[row]) x *= inv;
    for (std::size_t r = 0; r < ne; ++r) {
      if (r == row || a[r][col] == 0) continue;
      Rat f = a[r][col];
      for (std::size_t c2 = 0; c2 <= nf; ++c2) a[r][c2] -= f * a[row][c2];
    }
    pivot_row[col] = row++;
  }
  for (std::size_t r = row; r < ne; ++r) {
    if (a[r][nf] != 0) throw InternalInconsistency("norm does not lie in the subfield");
  }
  std::vector<Int> beta(nf);
  for (std::size_t j = 0; j < nf; ++j) {
    const Rat& v = a[pivot_row[j]][nf];
    if (v.get_den() != 1) throw InternalInconsistency("norm is not integral in the subfield basis");
    beta[j] = Int(v.get_num());
  }
  CycloInt out(m_f, beta);
  // Re-embed and compare.
  std::vector<Int> emb(m_e, Int(0));
  for (std::size_t j = 0; j < nf; ++j) emb[(j * d) % m_e] += beta[j];
  if (CycloInt::from_exponents(m_e, emb) != prod) throw InternalInconsistency("subfield recognition failed");
  return out;
}

CycloFrac norm_to_subfield(const CycloFrac& alpha, std::uint64_t m_f) {
  std::uint64_t deg = CycloContext::get(alpha.modulus())->phi / CycloContext::get(m_f)->phi;
  return CycloFrac(norm_to_subfield(alpha.num(), m_f), ipow(alpha.den(), deg));
}

CycloFrac group_ring_power(const CycloFrac& lambda, const GroupRingElement& x) {
  std::uint64_t m = lambda.modulus();
  const auto& g = *x.group();
  if (g.modulus() != m || g.order() != euler_phi(m)) throw InvalidInput("exponent must lie in Z[(Z/m)^x]");
  if (!x.domain().is_rational() || !x.has_integer_coeffs()) throw InvalidInput("exponent must be integral");
  if (!(lambda * conj_frac(lambda)).is_one()) throw InvalidInput("group_ring_power needs lambda^{1+j} = 1");
  CycloFrac out(CycloInt::from_int(m, 1));
  for (std::size_t s = 0; s < x.size(); ++s) {
    Int c(x.rat(s).get_num());
    if (c == 0) continue;
    std::uint64_t a = g.rep(s);
    if (c < 0) {
      a = m - a;
      c = -c;
    }
    out = out * lambda.galois(a).pow(c.get_ui());
  }
  return out;
}

NormRelationResult norm_relation_check(std::uint64_t b, std::uint64_t m_f, std::uint64_t q, std::uint64_t p) {
  if (!is_prime_u64(q)) throw InvalidInput("q must be prime");
  if (m_f % q == 0) throw InvalidInput("q must not divide m_F");
  std::uint64_t m_e = m_f * q;
  auto lam_e = bs_element(b, ResidueCharacter(p, m_e));
  auto lam_f = bs_element(b, ResidueCharacter(p, m_f));
  if (lam_f.r != powmod_u64(lam_e.r, q, p)) throw InternalInconsistency("attached primes are not compatible");
  auto gf = full_group(m_f);
  GroupRingElement x = euler_factor(gf, 1, q);
  NormRelationResult r{false, false, std::nullopt, FiniteDivisor(m_f), FiniteDivisor(m_f)};
  CycloFrac lhs = norm_to_subfield(lam_e.value, m_f);
  CycloFrac rhs = group_ring_power(lam_f.value, x);
  r.twist = root_of_unity_ratio(lhs, rhs);
  r.element_ok = r.twist.has_value();
  r.trace = principal_divisor(lam_e.value, {p}).trace_to(m_f);
  auto th = theta(gf, 0, b, m_f);
  r.expected = FiniteDivisor::prime(m_f, p, lam_f.r).act(th.element * x);
  r.divisor_ok = r.trace == r.expected && principal_divisor(lhs, {p}) == r.trace;
  return r;
}

TowerResult tower_norm_check(std::uint64_t b, std::uint64_t L, const std::vector<std::uint64_t>& lprimes, unsigned n,
                             std::uint64_t p) {
  TowerResult t;
  std::uint64_t top = L;
  for (auto q : lprimes) {
    if (!is_prime_u64(q) || L % q == 0) throw InvalidInput("tower primes must be primes not dividing L");
    top *= q;
  }
  if (n == 0) {
    t.ok = true;
    std::uint64_t cur = top;
    for (std::size_t i = lprimes.size(); i-- > 0;) {
      std::uint64_t below = cur / lprimes[i];
      auto step = norm_relation_check(b, below, lprimes[i], p);
      t.ok = t.ok && step.element_ok && step.divisor_ok;
      t.steps.push_back(std::move(step));
      cur = below;
    }
    return t;
  }
  auto ge = AbelianGaloisGroup::make(top);
  auto gf = AbelianGaloisGroup::make(L);
  t.restricted = restrict(theta(ge, n, b, top).element, gf);
  GroupRingElement forward = theta(gf, n, b, L).element;
  GroupRingElement backward = forward;
  std::vector<GroupRingElement> factors;
  for (auto q : lprimes) factors.push_back(euler_factor(gf, ipow(Int(static_cast<unsigned long>(q)), n), q));
  for (const auto& f : factors) forward = forward * f;
  for (std::size_t i = factors.size(); i-- > 0;) backward = backward * factors[i];
  for (std::size_t i = 0; i < factors.size(); ++i) {
    for (std::size_t j = 0; j < factors.size(); ++j) {
      t.commute = t.commute && factors[i] * factors[j] == factors[j] * factors[i];
    }
  }
  t.commute = t.commute && forward == backward;
  t.predicted = forward;
  t.ok = t.commute && *t.restricted == forward;
  return t;
}

LambdaStar lambda_star(std::uint64_t b, std::uint64_t m, std::uint64_t u) {
  if (!is_prime_u64(b) || (b - 1) % m != 0) throw InvalidInput("lambda* needs a prime b = 1 mod m");
  auto g = full_group(m);
  Int w = field_roots_of_unity(m);
  ResidueCharacter chi(b, m, u);
  std::uint64_t r = chi.attached_root();
  std::vector<AnnihilatorCandidate> all;
  for (std::uint64_t q = 2; all.size() < 12; ++q) {
    if (!is_prime_u64(q) || q == b || m % q == 0 || mpz_divisible_ui_p(w.get_mpz_t(), q)) continue;
    all.push_back({Int(static_cast<unsigned long>(q)), q});
  }
  for (std::size_t k = 1; k <= all.size(); ++k) {
    std::vector<AnnihilatorCandidate> cands(all.begin(), all.begin() + static_cast<long>(k));
    auto dec = annihilator_decomposition(g, Int(static_cast<unsigned long>(b)), b, cands, w);
    if (!dec) continue;
    CycloFrac value(CycloInt::from_int(m, 1));
    for (std::size_t i = 0; i < k; ++i) {
      auto lam = bs_element(cands[i].sigma, chi);
      value = value * group_ring_power(lam.value, dec->x[i]);
    }
    auto th = theta(g, 0, b, m);
    LambdaStar out{value, cands, *dec, principal_divisor(value, {b}),
                   FiniteDivisor::prime(m, b, r).act(th.element), false};
    out.ok = out.divisor == out.expected && (value * conj_frac(value)).is_one();
    return out;
  }
  throw InvalidInput("no annihilator decomposition found among the first 12 candidate primes");
}

}  // namespace stickel
