#include "stickel/groupring.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

namespace stickel {

namespace {

std::uint64_t mod_u(const Int& a, std::uint64_t m) {
  return mod_floor(a, Int(static_cast<unsigned long>(m))).get_ui();
}

}  // namespace

GroupPtr AbelianGaloisGroup::make(std::uint64_t m, const std::vector<std::uint64_t>& subgroup) {
  if (m == 0) throw InvalidInput("group modulus must be positive");
  std::shared_ptr<AbelianGaloisGroup> g(new AbelianGaloisGroup());
  g->m_ = m;
  if (m <= 2) {
    g->h_ = {1};
    g->reps_ = {1};
    g->coset_of_.assign(m, 0);
    g->cond_ = 1;
    g->cond_index_ = {0};
    g->conj_ = 0;
    return g;
  }
  // Close H under multiplication.
  std::vector<char> in_h(m, 0);
  std::vector<std::uint64_t> h{1};
  in_h[1] = 1;
  for (std::size_t pos = 0; pos < h.size(); ++pos) {
    for (auto s : subgroup) {
      std::uint64_t sm = s % m;
      if (gcd_u64(sm, m) != 1) {
        throw InvalidInput("subgroup generator " + std::to_string(s) + " is not a unit mod " +
                           std::to_string(m));
      }
      std::uint64_t y = static_cast<std::uint64_t>(static_cast<unsigned __int128>(h[pos]) * sm % m);
      if (!in_h[y]) {
        in_h[y] = 1;
        h.push_back(y);
      }
    }
  }
  std::sort(h.begin(), h.end());
  g->h_ = h;
  g->coset_of_.assign(m, -1);
  for (std::uint64_t a = 1; a < m; ++a) {
    if (gcd_u64(a, m) != 1 || g->coset_of_[a] >= 0) continue;
    long idx = static_cast<long>(g->reps_.size());
    g->reps_.push_back(a);
    for (auto x : h) {
      g->coset_of_[static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * x % m)] = idx;
    }
  }
  // Conductor.
  g->cond_ = m;
  for (std::uint64_t d = 1; d <= m; ++d) {
    if (m % d != 0) continue;
    bool ok = true;
    for (std::uint64_t u = 1; u < m && ok; ++u) {
      if (gcd_u64(u, m) == 1 && u % d == 1 % d && g->coset_of_[u] != 0) ok = false;
    }
    if (ok) {
      g->cond_ = d;
      break;
    }
  }
  g->cond_index_.assign(g->cond_, -1);
  for (std::uint64_t u = 0; u < g->cond_; ++u) {
    if (gcd_u64(u, g->cond_) != 1) continue;
    for (std::uint64_t x = u; x < m + g->cond_; x += g->cond_) {
      if (gcd_u64(x % m, m) == 1) {
        g->cond_index_[u] = g->coset_of_[x % m];
        break;
      }
    }
  }
  g->conj_ = static_cast<std::size_t>(g->coset_of_[m - 1]);
  return g;
}

std::optional<std::size_t> AbelianGaloisGroup::try_index_of(std::uint64_t a) const {
  if (m_ <= 2) {
    if (m_ == 2 && a % 2 == 0) return std::nullopt;
    return 0;
  }
  std::uint64_t r = a % m_;
  if (coset_of_[r] >= 0) return static_cast<std::size_t>(coset_of_[r]);
  std::uint64_t rc = a % cond_;
  if (cond_index_[rc] >= 0) return static_cast<std::size_t>(cond_index_[rc]);
  return std::nullopt;
}

std::size_t AbelianGaloisGroup::index_of(std::uint64_t a) const {
  auto idx = try_index_of(a);
  if (!idx) {
    throw InvalidInput("sigma_" + std::to_string(a) + " is not defined on " + describe());
  }
  return *idx;
}

std::size_t AbelianGaloisGroup::index_of(const Int& a) const {
  // Reduce modulo m (a multiple of the conductor) first.
  return index_of(mod_u(a, m_));
}

std::size_t AbelianGaloisGroup::mul(std::size_t i, std::size_t j) const {
  if (m_ <= 2) return 0;
  auto x = static_cast<std::uint64_t>(static_cast<unsigned __int128>(reps_[i]) * reps_[j] % m_);
  return static_cast<std::size_t>(coset_of_[x]);
}

std::size_t AbelianGaloisGroup::inv(std::size_t i) const {
  if (m_ <= 2) return 0;
  return static_cast<std::size_t>(coset_of_[invmod_u64(reps_[i], m_)]);
}

namespace {

// (p^a, m') with m = p^a m'.
std::pair<std::uint64_t, std::uint64_t> split_prime(std::uint64_t m, std::uint64_t p) {
  std::uint64_t pa = 1;
  while (m % p == 0) {
    m /= p;
    pa *= p;
  }
  return {pa, m};
}

}  // namespace

std::size_t AbelianGaloisGroup::frobenius(std::uint64_t p) const {
  if (!is_prime_u64(p)) throw InvalidInput("frobenius: " + std::to_string(p) + " is not prime");
  if (m_ <= 2) return 0;
  auto [pa, mp] = split_prime(m_, p);
  // x = p mod m', x = 1 mod p^a.
  for (std::uint64_t x = 1; x < m_ + 1; ++x) {
    if (x % pa == 1 % pa && x % mp == p % mp && gcd_u64(x, m_) == 1) return index_of(x);
  }
  throw InternalInconsistency("frobenius: CRT lift not found");
}

std::vector<std::size_t> AbelianGaloisGroup::inertia(std::uint64_t p) const {
  std::set<std::size_t> out{0};
  if (m_ > 2) {
    auto [pa, mp] = split_prime(m_, p);
    if (pa > 1) {
      for (std::uint64_t x = 1; x < m_; ++x) {
        if (gcd_u64(x, m_) == 1 && x % mp == 1 % mp) out.insert(index_of(x));
      }
    }
  }
  return {out.begin(), out.end()};
}

std::vector<std::size_t> AbelianGaloisGroup::decomposition(std::uint64_t p) const {
  auto in = inertia(p);
  std::size_t f = frobenius(p);
  std::set<std::size_t> out(in.begin(), in.end());
  std::vector<std::size_t> frontier(in.begin(), in.end());
  while (!frontier.empty()) {
    std::vector<std::size_t> next;
    for (auto x : frontier) {
      std::size_t y = mul(x, f);
      if (out.insert(y).second) next.push_back(y);
    }
    frontier = std::move(next);
  }
  return {out.begin(), out.end()};
}

std::string AbelianGaloisGroup::describe() const {
  if (m_ <= 2) return "Q";
  std::string s = "Q(mu_" + std::to_string(m_) + ")";
  if (h_.size() > 1) {
    s += "^<";
    for (std::size_t i = 0; i < h_.size(); ++i) s += (i ? "," : "") + std::to_string(h_[i]);
    s += ">";
  }
  return s;
}

bool same_group(const GroupPtr& a, const GroupPtr& b) { return a == b || *a == *b; }

// ---------------------------------------------------------------------------

CoeffDomain CoeffDomain::modular(std::uint64_t l, int k) {
  if (!is_prime_u64(l)) throw InvalidInput("coefficient prime " + std::to_string(l) + " is not prime");
  if (k < 1) throw InvalidInput("coefficient precision must be >= 1");
  return CoeffDomain{l, k};
}

Int CoeffDomain::modulus() const {
  if (is_rational()) throw InvalidInput("rational domain has no modulus");
  return ipow(Int(static_cast<unsigned long>(l)), static_cast<unsigned long>(k));
}

std::string CoeffDomain::name() const {
  if (is_rational()) return "rat";
  return "mod " + std::to_string(l) + "^" + std::to_string(k);
}

CoeffDomain CoeffDomain::parse(const std::string& s) {
  if (s == "rat") return rational();
  std::uint64_t l = 0;
  int k = 0;
  char caret = 0;
  std::istringstream in(s);
  std::string word;
  if (!(in >> word) || word != "mod" || !(in >> l >> caret >> k) || caret != '^') {
    throw InvalidInput("bad coefficient domain '" + s + "'");
  }
  return modular(l, k);
}

GroupRingElement::GroupRingElement(GroupPtr g, CoeffDomain d) : g_(std::move(g)), d_(d) {
  if (!g_) throw InvalidInput("null group");
  if (d_.is_rational()) {
    q_.assign(g_->order(), Rat(0));
  } else {
    z_.assign(g_->order(), Int(0));
  }
}

GroupRingElement GroupRingElement::basis(GroupPtr g, std::size_t idx, CoeffDomain d) {
  GroupRingElement x(std::move(g), d);
  x.add(idx, Rat(1));
  return x;
}

GroupRingElement GroupRingElement::sigma(GroupPtr g, std::uint64_t a, CoeffDomain d) {
  std::size_t idx = g->index_of(a);
  return basis(std::move(g), idx, d);
}

GroupRingElement GroupRingElement::identity(GroupPtr g, CoeffDomain d) { return basis(std::move(g), 0, d); }

GroupRingElement GroupRingElement::scalar(GroupPtr g, const Rat& c, CoeffDomain d) {
  GroupRingElement x(std::move(g), d);
  x.add(0, c);
  return x;
}

const Rat& GroupRingElement::rat(std::size_t idx) const {
  if (!d_.is_rational()) throw InvalidInput("rational coefficient requested from " + d_.name() + " element");
  return q_.at(idx);
}

const Int& GroupRingElement::residue(std::size_t idx) const {
  if (d_.is_rational()) throw InvalidInput("residue requested from rational element");
  return z_.at(idx);
}

PadicResidue GroupRingElement::padic(std::size_t idx) const { return PadicResidue(residue(idx), d_.l, d_.k); }

void GroupRingElement::set(std::size_t idx, const Rat& c) {
  if (d_.is_rational()) {
    q_.at(idx) = c;
    q_.at(idx).canonicalize();
  } else {
    z_.at(idx) = rat_mod_prime_power(c, d_.l, d_.k);
  }
}

void GroupRingElement::set_residue(std::size_t idx, const Int& c) {
  if (d_.is_rational()) throw InvalidInput("set_residue on rational element");
  z_.at(idx) = mod_floor(c, d_.modulus());
}

void GroupRingElement::add(std::size_t idx, const Rat& c) {
  if (d_.is_rational()) {
    q_.at(idx) += c;
    q_.at(idx).canonicalize();
  } else {
    z_.at(idx) = mod_floor(z_.at(idx) + rat_mod_prime_power(c, d_.l, d_.k), d_.modulus());
  }
}

bool GroupRingElement::coeff_is_zero(std::size_t idx) const {
  return d_.is_rational() ? q_.at(idx) == 0 : z_.at(idx) == 0;
}

void GroupRingElement::check_same(const GroupRingElement& o) const {
  if (!same_group(g_, o.g_)) {
    throw InvalidInput("group mismatch: " + g_->describe() + " vs " + o.g_->describe());
  }
  if (!(d_ == o.d_)) throw InvalidInput("coefficient domain mismatch: " + d_.name() + " vs " + o.d_.name());
}

GroupRingElement GroupRingElement::operator+(const GroupRingElement& o) const {
  check_same(o);
  GroupRingElement r(*this);
  if (d_.is_rational()) {
    for (std::size_t i = 0; i < q_.size(); ++i) r.q_[i] += o.q_[i];
  } else {
    Int mod = d_.modulus();
    for (std::size_t i = 0; i < z_.size(); ++i) r.z_[i] = mod_floor(z_[i] + o.z_[i], mod);
  }
  return r;
}

GroupRingElement GroupRingElement::operator-() const {
  GroupRingElement r(*this);
  if (d_.is_rational()) {
    for (auto& c : r.q_) c = -c;
  } else {
    Int mod = d_.modulus();
    for (auto& c : r.z_) c = mod_floor(-c, mod);
  }
  return r;
}

GroupRingElement GroupRingElement::operator-(const GroupRingElement& o) const { return *this + (-o); }

GroupRingElement GroupRingElement::operator*(const GroupRingElement& o) const {
  check_same(o);
  GroupRingElement r(g_, d_);
  std::size_t n = size();
  if (d_.is_rational()) {
    for (std::size_t i = 0; i < n; ++i) {
      if (q_[i] == 0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (o.q_[j] == 0) continue;
        r.q_[g_->mul(i, j)] += q_[i] * o.q_[j];
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      if (z_[i] == 0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (o.z_[j] == 0) continue;
        r.z_[g_->mul(i, j)] += z_[i] * o.z_[j];
      }
    }
    Int mod = d_.modulus();
    for (auto& c : r.z_) c = mod_floor(c, mod);
  }
  return r;
}

GroupRingElement GroupRingElement::scaled(const Rat& c) const {
  GroupRingElement r(*this);
  if (d_.is_rational()) {
    for (auto& x : r.q_) x *= c;
  } else {
    Int cm = rat_mod_prime_power(c, d_.l, d_.k);
    Int mod = d_.modulus();
    for (auto& x : r.z_) x = mod_floor(x * cm, mod);
  }
  return r;
}

bool GroupRingElement::operator==(const GroupRingElement& o) const {
  if (!same_group(g_, o.g_) || !(d_ == o.d_)) return false;
  return d_.is_rational() ? q_ == o.q_ : z_ == o.z_;
}

bool GroupRingElement::is_zero() const {
  for (std::size_t i = 0; i < size(); ++i) {
    if (!coeff_is_zero(i)) return false;
  }
  return true;
}

GroupRingElement GroupRingElement::shifted(std::size_t idx) const {
  GroupRingElement r(g_, d_);
  for (std::size_t i = 0; i < size(); ++i) {
    std::size_t t = g_->mul(i, idx);
    if (d_.is_rational()) {
      r.q_[t] = q_[i];
    } else {
      r.z_[t] = z_[i];
    }
  }
  return r;
}

GroupRingElement GroupRingElement::involution() const {
  GroupRingElement r(g_, d_);
  for (std::size_t i = 0; i < size(); ++i) {
    std::size_t t = g_->inv(i);
    if (d_.is_rational()) {
      r.q_[t] = q_[i];
    } else {
      r.z_[t] = z_[i];
    }
  }
  return r;
}

std::optional<std::size_t> GroupRingElement::non_integral_at(std::uint64_t l) const {
  if (!d_.is_rational()) return std::nullopt;
  Int ll(static_cast<unsigned long>(l));
  for (std::size_t i = 0; i < size(); ++i) {
    if (mpz_divisible_p(q_[i].get_den_mpz_t(), ll.get_mpz_t())) return i;
  }
  return std::nullopt;
}

bool GroupRingElement::has_integer_coeffs() const {
  if (!d_.is_rational()) return true;
  return std::all_of(q_.begin(), q_.end(), [](const Rat& c) { return c.get_den() == 1; });
}

GroupRingElement GroupRingElement::reduce(std::uint64_t l, int k) const {
  if (!d_.is_rational()) {
    if (d_.l != l || d_.k < k) throw InvalidInput("cannot reduce " + d_.name() + " to mod " + std::to_string(l) + "^" + std::to_string(k));
    GroupRingElement r(g_, CoeffDomain::modular(l, k));
    for (std::size_t i = 0; i < size(); ++i) r.set_residue(i, z_[i]);
    return r;
  }
  if (auto bad = non_integral_at(l)) {
    throw InvalidInput("coefficient at sigma_" + std::to_string(g_->rep(*bad)) + " is not " +
                       std::to_string(l) + "-integral");
  }
  GroupRingElement r(g_, CoeffDomain::modular(l, k));
  for (std::size_t i = 0; i < size(); ++i) r.z_[i] = rat_mod_prime_power(q_[i], l, k);
  return r;
}

GroupRingElement GroupRingElement::inverse() const {
  if (d_.is_rational()) throw InvalidInput("inverse is only provided over Z/l^k");
  std::size_t n = size();
  std::uint64_t l = d_.l;
  // Solve x * v = 1 mod l by elimination on the multiplication matrix.
  std::vector<std::vector<std::uint64_t>> a(n, std::vector<std::uint64_t>(n + 1, 0));
  for (std::size_t j = 0; j < n; ++j) {
    std::uint64_t c = mod_u(z_[j], l);
    if (c == 0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      // (x * e_i) has coefficient c at j*i.
      std::size_t row = g_->mul(j, i);
      a[row][i] = (a[row][i] + c) % l;
    }
  }
  a[0][n] = 1;
  std::vector<std::size_t> where(n, n);
  std::size_t row = 0;
  for (std::size_t col = 0; col < n && row < n; ++col) {
    std::size_t piv = row;
    while (piv < n && a[piv][col] == 0) ++piv;
    if (piv == n) continue;
    std::swap(a[piv], a[row]);
    std::uint64_t inv = invmod_u64(a[row][col], l);
    for (auto& v : a[row]) v = static_cast<std::uint64_t>(static_cast<unsigned __int128>(v) * inv % l);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == row || a[r][col] == 0) continue;
      std::uint64_t f = a[r][col];
      for (std::size_t c = 0; c <= n; ++c) {
        a[r][c] = (a[r][c] + (l - static_cast<std::uint64_t>(static_cast<unsigned __int128>(f) * a[row][c] % l))) % l;
      }
    }
    where[col] = row++;
  }
  if (row < n) throw InvalidInput("element is not a unit in " + d_.name() + "[G]");
  GroupRingElement v(g_, d_);
  for (std::size_t i = 0; i < n; ++i) v.z_[i] = Int(static_cast<unsigned long>(a[where[i]][n]));
  // Newton: v <- v (2 - x v), doubling l-adic precision each step.
  GroupRingElement two = scalar(g_, Rat(2), d_);
  for (int prec = 1; prec < d_.k; prec *= 2) v = v * (two - (*this) * v);
  if (!((*this) * v == identity(g_, d_))) throw InternalInconsistency("group ring inverse failed to verify");
  return v;
}

Json GroupRingElement::to_json() const {
  Json j;
  j["modulus"] = std::to_string(g_->modulus());
  Json sub = Json::array();
  for (auto h : g_->subgroup()) sub.push_back(std::to_string(h));
  j["subgroup"] = sub;
  j["domain"] = d_.name();
  Json coeffs = Json::object();
  for (std::size_t i = 0; i < size(); ++i) {
    if (coeff_is_zero(i)) continue;
    coeffs[std::to_string(g_->rep(i))] = d_.is_rational() ? q_[i].get_str() : z_[i].get_str();
  }
  j["coeffs"] = coeffs;
  return j;
}

GroupRingElement GroupRingElement::from_json(const Json& j) {
  try {
    std::uint64_t m = std::stoull(j.at("modulus").get<std::string>());
    std::vector<std::uint64_t> sub;
    for (const auto& h : j.at("subgroup")) sub.push_back(std::stoull(h.get<std::string>()));
    auto g = AbelianGaloisGroup::make(m, sub);
    if (g->subgroup() != [&] {
          auto s = sub;
          std::sort(s.begin(), s.end());
          return s;
        }()) {
      throw InvalidInput("subgroup list is not closed");
    }
    CoeffDomain d = CoeffDomain::parse(j.at("domain").get<std::string>());
    GroupRingElement x(g, d);
    for (const auto& [key, value] : j.at("coeffs").items()) {
      std::uint64_t a = std::stoull(key);
      std::size_t idx = g->index_of(a);
      if (g->rep(idx) != a) throw InvalidInput("coefficient key " + key + " is not a canonical representative");
      if (d.is_rational()) {
        x.set(idx, parse_rat(value.get<std::string>()));
      } else {
        Int r(value.get<std::string>());
        if (r < 0 || r >= d.modulus()) throw InvalidInput("residue out of range: " + key);
        x.set_residue(idx, r);
      }
    }
    return x;
  } catch (const InvalidInput&) {
    throw;
  } catch (const std::exception& e) {
    throw InvalidInput(std::string("malformed group ring element: ") + e.what());
  }
}

std::string GroupRingElement::to_string() const {
  std::ostringstream out;
  bool first = true;
  for (std::size_t i = 0; i < size(); ++i) {
    if (coeff_is_zero(i)) continue;
    std::string c = d_.is_rational() ? q_[i].get_str() : z_[i].get_str();
    bool neg = !c.empty() && c[0] == '-';
    if (neg) c = c.substr(1);
    if (first) {
      out << (neg ? "-" : "");
    } else {
      out << (neg ? " - " : " + ");
    }
    if (c != "1") out << c << "*";
    out << "s" << g_->rep(i);
    first = false;
  }
  if (first) out << "0";
  return out.str();
}

// ---------------------------------------------------------------------------

GroupRingElement restrict(const GroupRingElement& x, const GroupPtr& target) {
  const auto& src = *x.group();
  std::uint64_t mt = target->modulus();
  if (mt > 2 && src.modulus() % mt != 0) {
    throw InvalidInput("restriction: " + target->describe() + " is not a subfield of " + src.describe());
  }
  for (auto h : src.subgroup()) {
    auto idx = target->try_index_of(h);
    if (!idx || *idx != 0) {
      throw InvalidInput("restriction: " + target->describe() + " is not contained in " + src.describe());
    }
  }
  GroupRingElement r(target, x.domain());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x.coeff_is_zero(i)) continue;
    std::size_t t = target->index_of(src.rep(i));
    if (x.domain().is_rational()) {
      r.add(t, x.rat(i));
    } else {
      r.set_residue(t, r.residue(t) + x.residue(i));
    }
  }
  return r;
}

Int w_n_part(const AbelianGaloisGroup& g, long n, std::uint64_t l) {
  if (n == 0) throw InvalidInput("w_n requires n != 0");
  if (!is_prime_u64(l)) throw InvalidInput("w_n: l must be prime");
  std::uint64_t an = static_cast<std::uint64_t>(n < 0 ? -n : n);
  std::uint64_t m = g.modulus() <= 2 ? 1 : g.modulus();
  int t = 0;
  std::uint64_t lt = 1;
  while (m % (lt * l) == 0) {
    lt *= l;
    ++t;
  }
  // Projection of H to (Z/l^t)^x.
  std::set<std::uint64_t> proj;
  if (t == 0) {
    proj.insert(0);
  } else {
    for (auto h : g.subgroup()) proj.insert(h % lt);
  }
  int vn = val_u64(an, l);
  Int L(static_cast<unsigned long>(l));
  if (l != 2) {
    // Roots-of-unity part first.
    std::vector<std::uint64_t> residues;
    if (t == 0) {
      for (std::uint64_t s = 1; s < l; ++s) residues.push_back(s);
    } else {
      for (auto h : proj) residues.push_back(h % l);
    }
    for (auto s : residues) {
      if (powmod_u64(s, an % (l - 1), l) != 1) return 1;
    }
    int e = std::max(t, 1);
    if (t > 0) {
      for (auto h : proj) {
        Int hl = ipow(Int(static_cast<unsigned long>(h)), l - 1) - 1;
        Int ltz(static_cast<unsigned long>(lt));
        Int r = mod_floor(hl, ltz);
        int v = r == 0 ? t : static_cast<int>(padic_val(r, l));
        e = std::min(e, v);
      }
    } else {
      e = 1;
    }
    return ipow(L, static_cast<unsigned long>(e + vn));
  }
  // l = 2: enumerate residues modulo a sufficiently high power.
  int K = std::max(t, 2) + vn + 2;
  std::uint64_t lk = 1ULL << K;
  Int mod(static_cast<unsigned long>(lk));
  int best = K;
  for (std::uint64_t u = 1; u < lk; u += 2) {
    if (t > 0 && !proj.count(u % lt)) continue;
    Int val = mod_floor(Int(static_cast<unsigned long>(powmod_u64(u, an, lk))) - 1, mod);
    int v = val == 0 ? K : static_cast<int>(padic_val(val, 2));
    best = std::min(best, v);
  }
  return ipow(L, static_cast<unsigned long>(best));
}

Int roots_of_unity_order(const AbelianGaloisGroup& g) {
  std::uint64_t m = g.modulus() <= 2 ? 1 : g.modulus();
  auto primes = prime_factors(2 * m);
  Int w = 1;
  for (auto l : primes) w *= w_n_part(g, 1, l);
  return w;
}

std::vector<Int> cyclotomic_character_table(const AbelianGaloisGroup& g, long n, const Int& w) {
  if (w < 1) throw InvalidInput("cyclotomic character modulus must be positive");
  std::size_t ord = g.order();
  std::vector<Int> table(ord);
  std::vector<char> seen(ord, 0);
  if (w == 1) return std::vector<Int>(ord, Int(0));
  std::uint64_t m = g.modulus();
  std::uint64_t wu = w.get_ui();
  std::uint64_t L = lcm_u64(m, wu);
  for (std::uint64_t x = 1; x <= L; ++x) {
    if (gcd_u64(x, m) != 1 || gcd_u64(x, wu) != 1) continue;
    std::size_t idx = g.index_of(x);
    std::uint64_t val = n >= 0 ? powmod_u64(x % wu, static_cast<std::uint64_t>(n), wu)
                               : powmod_u64(invmod_u64(x % wu, wu), static_cast<std::uint64_t>(-n), wu);
    Int v(static_cast<unsigned long>(val));
    if (!seen[idx]) {
      seen[idx] = 1;
      table[idx] = v;
    } else if (table[idx] != v) {
      throw InvalidInput("the cyclotomic character to the power " + std::to_string(n) + " mod " + w.get_str() +
                         " does not factor through G(" + g.describe() + "/Q)");
    }
  }
  return table;
}

GroupRingElement twist_tn(const GroupRingElement& x, long n, std::uint64_t l) {
  const auto& d = x.domain();
  if (d.is_rational() || d.l != l) {
    throw InvalidInput("twist t_n needs coefficients mod a power of " + std::to_string(l));
  }
  Int w = d.modulus();
  std::vector<Int> table;
  try {
    table = cyclotomic_character_table(*x.group(), n, w);
  } catch (const InvalidInput&) {
    throw InvalidInput("twist t_" + std::to_string(n) + ": modulus " + w.get_str() + " does not divide w_" +
                       std::to_string(n) + "(F)_" + std::to_string(l));
  }
  GroupRingElement r(x.group(), d);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x.coeff_is_zero(i)) continue;
    Int inv;
    mpz_invert(inv.get_mpz_t(), table[i].get_mpz_t(), w.get_mpz_t());
    r.set_residue(i, x.residue(i) * inv);
  }
  return r;
}

std::vector<Int> omega_power_table(const AbelianGaloisGroup& g, long i, std::uint64_t l, int k) {
  if (l == 2 || !is_prime_u64(l)) throw InvalidInput("omega: l must be an odd prime");
  std::vector<Int> teich(l);
  Int ie(i);
  for (std::uint64_t a = 1; a < l; ++a) teich[a] = teichmuller(Int(static_cast<unsigned long>(a)), l, k).pow(ie).value();
  std::size_t ord = g.order();
  std::vector<Int> table(ord);
  std::vector<char> seen(ord, 0);
  std::uint64_t m = g.modulus();
  std::uint64_t L = lcm_u64(m, l);
  for (std::uint64_t x = 1; x <= L; ++x) {
    if (gcd_u64(x, m) != 1 || x % l == 0) continue;
    std::size_t idx = g.index_of(x);
    const Int& v = teich[x % l];
    if (!seen[idx]) {
      seen[idx] = 1;
      table[idx] = v;
    } else if (table[idx] != v) {
      throw InvalidInput("omega^" + std::to_string(i) + " does not factor through G(" + g.describe() + "/Q)");
    }
  }
  return table;
}

PadicResidue omega_char_value(const GroupRingElement& x, long i, std::uint64_t l, int k) {
  const auto& d = x.domain();
  if (!d.is_rational() && (d.l != l || d.k < k)) {
    throw InvalidInput("omega_char_value: element has coefficients " + d.name());
  }
  auto table = omega_power_table(*x.group(), i, l, k);
  Int mod = ipow(Int(static_cast<unsigned long>(l)), static_cast<unsigned long>(k));
  Int acc = 0;
  for (std::size_t s = 0; s < x.size(); ++s) {
    if (x.coeff_is_zero(s)) continue;
    Int c;
    if (d.is_rational()) {
      try {
        c = rat_mod_prime_power(x.rat(s), l, k);
      } catch (const InvalidInput&) {
        throw InvalidInput("omega_char_value: coefficient at sigma_" + std::to_string(x.group()->rep(s)) +
                           " is not " + std::to_string(l) + "-integral");
      }
    } else {
      c = x.residue(s);
    }
    acc += c * table[s];
  }
  return PadicResidue(acc, l, k);
}

GroupRingElement idempotent(long i, std::uint64_t l, int k, const GroupPtr& g) {
  std::uint64_t n = g->order();
  if (n % l == 0) throw InvalidInput("idempotent: l divides |G|");
  auto table = omega_power_table(*g, i, l, k);
  CoeffDomain d = CoeffDomain::modular(l, k);
  Rat inv_n(1, static_cast<unsigned long>(n));
  GroupRingElement e(g, d);
  for (std::size_t s = 0; s < n; ++s) e.add(g->inv(s), Rat(table[s]) * inv_n);
  return e;
}

GroupRingElement euler_factor(const GroupPtr& g, const Int& norm, std::uint64_t sigma, CoeffDomain d) {
  GroupRingElement x = GroupRingElement::identity(g, d);
  x.add(g->inv(g->index_of(sigma)), Rat(-norm));
  return x;
}

// ---------------------------------------------------------------------------
// Integer linear algebra for annihilator decompositions.

namespace {

using IntMat = std::vector<std::vector<Int>>;

IntMat identity_mat(std::size_t n) {
  IntMat m(n, std::vector<Int>(n, Int(0)));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
  return m;
}

struct Diagonalization {
  IntMat d;  // U A V
  IntMat u;
  IntMat v;
  std::size_t rank = 0;
};

// Diagonal (not necessarily Smith-divisible) form U A V = D with U, V unimodular.
Diagonalization diagonalize(IntMat a) {
  std::size_t rows = a.size();
  std::size_t cols = rows ? a[0].size() : 0;
  IntMat u = identity_mat(rows);
  IntMat v = identity_mat(cols);
  auto swap_rows = [&](std::size_t i, std::size_t j) {
    std::swap(a[i], a[j]);
    std::swap(u[i], u[j]);
  };
  auto swap_cols = [&](std::size_t i, std::size_t j) {
    for (auto& r : a) std::swap(r[i], r[j]);
    for (auto& r : v) std::swap(r[i], r[j]);
  };
  std::size_t t = 0;
  for (; t < std::min(rows, cols); ++t) {
    // Pivot: nonzero entry of least absolute value.
    std::size_t pi = rows, pj = cols;
    for (std::size_t i = t; i < rows; ++i) {
      for (std::size_t j = t; j < cols; ++j) {
        if (a[i][j] != 0 && (pi == rows || abs(a[i][j]) < abs(a[pi][pj]))) {
          pi = i;
          pj = j;
        }
      }
    }
    if (pi == rows) break;
    swap_rows(t, pi);
    swap_cols(t, pj);
    for (;;) {
      bool clean = true;
      for (std::size_t i = t + 1; i < rows; ++i) {
        if (a[i][t] == 0) continue;
        Int q;
        mpz_tdiv_q(q.get_mpz_t(), a[i][t].get_mpz_t(), a[t][t].get_mpz_t());
        for (std::size_t j = t; j < cols; ++j) a[i][j] -= q * a[t][j];
        for (std::size_t j = 0; j < rows; ++j) u[i][j] -= q * u[t][j];
        if (a[i][t] != 0) clean = false;
      }
      for (std::size_t j = t + 1; j < cols; ++j) {
        if (a[t][j] == 0) continue;
        Int q;
        mpz_tdiv_q(q.get_mpz_t(), a[t][j].get_mpz_t(), a[t][t].get_mpz_t());
        for (std::size_t i = t; i < rows; ++i) a[i][j] -= q * a[i][t];
        for (std::size_t i = 0; i < cols; ++i) v[i][j] -= q * v[i][t];
        if (a[t][j] != 0) clean = false;
      }
      if (clean) break;
      // Move the smallest remainder into the pivot and repeat.
      std::size_t bi = t, bj = t;
      for (std::size_t i = t + 1; i < rows; ++i) {
        if (a[i][t] != 0 && abs(a[i][t]) < abs(a[bi][bj])) {
          bi = i;
          bj = t;
        }
      }
      for (std::size_t j = t + 1; j < cols; ++j) {
        if (a[t][j] != 0 && abs(a[t][j]) < abs(a[bi][bj])) {
          bi = t;
          bj = j;
        }
      }
      if (bi != t) swap_rows(t, bi);
      if (bj != t) swap_cols(t, bj);
    }
  }
  return {std::move(a), std::move(u), std::move(v), t};
}

Int l1(const std::vector<Int>& x) {
  Int s = 0;
  for (const auto& c : x) s += abs(c);
  return s;
}

// Integer c minimizing |x + c v|_1 (weighted median of the breakpoints).
Int best_step(const std::vector<Int>& x, const std::vector<Int>& v) {
  std::vector<std::pair<Rat, Int>> pts;
  Int total = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (v[j] == 0) continue;
    Rat bp(-x[j], v[j]);
    bp.canonicalize();
    pts.emplace_back(bp, abs(v[j]));
    total += abs(v[j]);
  }
  if (pts.empty()) return 0;
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  Int acc = 0;
  Rat med = pts.back().first;
  for (const auto& [bp, w] : pts) {
    acc += w;
    if (2 * acc >= total) {
      med = bp;
      break;
    }
  }
  Int fl, ce;
  mpz_fdiv_q(fl.get_mpz_t(), med.get_num_mpz_t(), med.get_den_mpz_t());
  mpz_cdiv_q(ce.get_mpz_t(), med.get_num_mpz_t(), med.get_den_mpz_t());
  Int best = 0;
  Int best_val = l1(x);
  for (const Int& c : {fl, ce}) {
    std::vector<Int> y(x);
    for (std::size_t j = 0; j < y.size(); ++j) y[j] += c * v[j];
    Int val = l1(y);
    if (val < best_val || (val == best_val && abs(c) < abs(best))) {
      best_val = val;
      best = c;
    }
  }
  return best;
}

void axpy(std::vector<Int>& x, const Int& c, const std::vector<Int>& v) {
  for (std::size_t j = 0; j < x.size(); ++j) x[j] += c * v[j];
}

}  // namespace

std::optional<AnnihilatorDecomposition> annihilator_decomposition(
    const GroupPtr& g, const Int& b_norm, std::uint64_t sigma_b,
    const std::vector<AnnihilatorCandidate>& candidates, const Int& w_f) {
  if (candidates.empty()) return std::nullopt;
  std::size_t n = g->order();
  auto chi = cyclotomic_character_table(*g, 1, w_f);
  auto annihilates = [&](const Int& norm, std::uint64_t s) {
    std::size_t idx = g->index_of(s);
    return mod_floor(norm - chi[idx], w_f) == 0;
  };
  if (!annihilates(b_norm, sigma_b)) {
    throw InvalidInput("(1 - Nb sigma_b^{-1}) does not annihilate mu_F");
  }
  std::vector<GroupRingElement> ys;
  for (const auto& c : candidates) {
    if (!annihilates(c.norm, c.sigma)) {
      throw InvalidInput("candidate (" + c.norm.get_str() + ", sigma_" + std::to_string(c.sigma) +
                         ") does not annihilate mu_F");
    }
    ys.push_back(euler_factor(g, c.norm, c.sigma));
  }
  GroupRingElement target = euler_factor(g, b_norm, sigma_b);
  std::size_t r = ys.size();
  std::size_t cols = r * n;
  // Column (i, s): coordinates of y_i * sigma_s.
  IntMat a(n, std::vector<Int>(cols, Int(0)));
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t s = 0; s < n; ++s) {
      auto col = ys[i].shifted(s);
      for (std::size_t row = 0; row < n; ++row) a[row][i * n + s] = Int(col.rat(row).get_num());
    }
  }
  auto dg = diagonalize(a);
  std::vector<Int> ut(n, Int(0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) ut[i] += dg.u[i][j] * Int(target.rat(j).get_num());
  }
  std::vector<Int> y(cols, Int(0));
  for (std::size_t i = 0; i < n; ++i) {
    if (i < dg.rank) {
      if (!mpz_divisible_p(ut[i].get_mpz_t(), dg.d[i][i].get_mpz_t())) return std::nullopt;
      y[i] = ut[i] / dg.d[i][i];
    } else if (ut[i] != 0) {
      return std::nullopt;
    }
  }
  std::vector<Int> x(cols, Int(0));
  for (std::size_t i = 0; i < cols; ++i) {
    for (std::size_t j = 0; j < dg.rank; ++j) x[i] += dg.v[i][j] * y[j];
  }
  // Kernel basis and deterministic L1 descent.
  std::vector<std::vector<Int>> kernel;
  for (std::size_t j = dg.rank; j < cols; ++j) {
    std::vector<Int> col(cols);
    for (std::size_t i = 0; i < cols; ++i) col[i] = dg.v[i][j];
    kernel.push_back(std::move(col));
  }
  for (int round = 0; round < 50; ++round) {
    bool changed = false;
    for (std::size_t i = 0; i < kernel.size(); ++i) {
      for (std::size_t j = 0; j < kernel.size(); ++j) {
        if (i == j) continue;
        Int c = best_step(kernel[i], kernel[j]);
        if (c != 0) {
          axpy(kernel[i], c, kernel[j]);
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  for (int round = 0; round < 1000; ++round) {
    bool changed = false;
    for (const auto& v : kernel) {
      Int c = best_step(x, v);
      if (c != 0) {
        axpy(x, c, v);
        changed = true;
      }
    }
    for (std::size_t i = 0; i < kernel.size() && !changed; ++i) {
      for (std::size_t j = i + 1; j < kernel.size() && !changed; ++j) {
        for (int sgn : {1, -1}) {
          std::vector<Int> v(kernel[i]);
          axpy(v, Int(sgn), kernel[j]);
          Int c = best_step(x, v);
          if (c != 0) {
            axpy(x, c, v);
            changed = true;
            break;
          }
        }
      }
    }
    if (!changed) break;
  }
  AnnihilatorDecomposition out;
  GroupRingElement check(g);
  for (std::size_t i = 0; i < r; ++i) {
    GroupRingElement xi(g);
    for (std::size_t s = 0; s < n; ++s) xi.set(s, Rat(x[i * n + s]));
    check = check + xi * ys[i];
    out.x.push_back(std::move(xi));
  }
  if (check != target) throw InternalInconsistency("annihilator decomposition failed re-substitution");
  out.l1_norm = l1(x);
  return out;
}

}  // namespace stickel
