#include <gtest/gtest.h>

#include "stickel/iwasawa.hpp"

using namespace stickel;

namespace {

// Irregular pairs (l, k) from l | numerator(B_k), even 2 <= k <= l - 3.
std::vector<std::pair<std::uint64_t, long>> irregular_pairs(std::uint64_t lmax) {
  std::vector<std::pair<std::uint64_t, long>> out;
  for (std::uint64_t l = 3; l < lmax; ++l) {
    if (!is_prime_u64(l)) continue;
    for (long k = 2; k + 3 <= static_cast<long>(l); k += 2) {
      Int num = bernoulli(static_cast<unsigned>(k)).get_num();
      if (mpz_divisible_ui_p(num.get_mpz_t(), l)) out.push_back({l, k});
    }
  }
  return out;
}

}  // namespace

TEST(Iwasawa, AdmissibleB) {
  EXPECT_TRUE(check_b(2, 5).admissible());
  EXPECT_FALSE(check_b(4, 5).admissible());
  EXPECT_FALSE(check_b(1, 5).admissible());
  // 7^4 = 2401 = 1 mod 25, so 7 is its own Teichmuller lift mod 25.
  EXPECT_FALSE(check_b(7, 5).second_condition_ok);
  EXPECT_EQ(smallest_admissible_b(37, true).b, 5u);
  for (std::uint64_t l : {5ULL, 7ULL, 11ULL, 37ULL}) {
    auto b = smallest_admissible_b(l);
    EXPECT_TRUE(b.admissible());
    EXPECT_TRUE(w_identity_check(b, 3 * (l - 1)));
  }
}

TEST(Iwasawa, EigenspaceOrdersMatchBernoulli) {
  auto pairs = irregular_pairs(110);
  EXPECT_EQ(pairs, (std::vector<std::pair<std::uint64_t, long>>{{37, 32}, {59, 44}, {67, 58}, {101, 68}, {103, 24}}));
  for (std::uint64_t l = 5; l < 110; ++l) {
    if (!is_prime_u64(l)) continue;
    auto b = smallest_admissible_b(l);
    for (long i = 1; i + 1 < static_cast<long>(l); i += 2) {
      auto e = eigenspace_order(l, i, b);
      bool irregular = false;
      for (auto [pl, k] : pairs) irregular = irregular || (pl == l && k == i + 1);
      EXPECT_EQ(e.order, irregular ? Int(static_cast<unsigned long>(l)) : Int(1)) << l << " " << i;
      EXPECT_TRUE(herbrand_cross_check(l, e.eigenspace(), e.order));
    }
  }
}

TEST(Iwasawa, EigenspaceIndependentOfB) {
  auto b1 = smallest_admissible_b(37);
  auto b2 = smallest_admissible_b(37, true);
  ASSERT_NE(b1.b, b2.b);
  for (long i = 1; i < 36; i += 2) EXPECT_EQ(eigenspace_order(37, i, b1).order, eigenspace_order(37, i, b2).order);
}

TEST(Iwasawa, PrimeSearch) {
  EXPECT_EQ(prime_search(5, 1, 5, 3, 1000).primes, (std::vector<std::uint64_t>{11, 31, 41}));
  EXPECT_EQ(prime_search(5, 2, 25, 2, 1000).primes, (std::vector<std::uint64_t>{101, 151}));
  auto none = prime_search(5, 1, 25, 3, 10000);  // 25 | q - 1 contradicts 5 || q - 1
  EXPECT_TRUE(none.primes.empty());
  EXPECT_TRUE(none.exhausted);
  for (auto q : prime_search(37, 1, 37, 10, 1000000).primes) {
    EXPECT_TRUE(is_prime_u64(q));
    EXPECT_EQ(val_u64(q - 1, 37), 1);
  }
}

TEST(Iwasawa, ProjectionSchemesAgree) {
  auto lam = bs_element(5, ResidueCharacter(149, 37));
  for (auto q : prime_search(37, 1, 37, 6, 1000000).primes) {
    if (q == 149) continue;
    auto a = project_powerclass(lam.value, 37, 31, q, 0);
    auto b = project_powerclass(lam.value, 37, 31, q, 1);
    EXPECT_EQ(a.y, b.y) << q;
    EXPECT_EQ(a.t, b.t) << q;
    if (a.t) EXPECT_EQ(powmod_u64(a.rho, *a.t, q), a.y);
  }
}

TEST(Iwasawa, ProbeCertifiesCyclicity) {
  auto rep = cyclicity_probe(37, 31, ProbeBounds{});
  EXPECT_EQ(rep.verdict, CyclicVerdict::certified_cyclic);
  EXPECT_EQ(rep.eigenspace, 5);
  EXPECT_EQ(rep.order.order, Int(37));
  ASSERT_FALSE(rep.evidence.empty());
  EXPECT_LE(rep.evidence.size(), 5u);
  const auto& ev = rep.evidence.back();
  EXPECT_TRUE(ev.test.certified);
  EXPECT_LE(ev.test.table.size(), 10u);
  EXPECT_TRUE(recheck_powerclass(ev.lambda.value, 31, 37, ev.test));

  auto tampered = ev.test;
  tampered.table.front().y = tampered.table.front().y % tampered.table.front().q + 1;
  EXPECT_FALSE(recheck_powerclass(ev.lambda.value, 31, 37, tampered));
}

TEST(Iwasawa, ProbeIsDeterministicAcrossJobs) {
  auto a = cyclicity_probe(37, 31, ProbeBounds{}, std::nullopt, 1).to_json().dump();
  auto b = cyclicity_probe(37, 31, ProbeBounds{}, std::nullopt, 4).to_json().dump();
  EXPECT_EQ(a, b);
}

TEST(Iwasawa, ProbeReportsExhaustion) {
  ProbeBounds tight;
  tight.max_p = 1;
  tight.max_q = 1;
  auto rep = cyclicity_probe(37, 31, tight);
  EXPECT_EQ(rep.verdict, CyclicVerdict::unknown);
  EXPECT_EQ(rep.evidence.size(), 1u);
  EXPECT_TRUE(rep.order_implies_cyclic);
  EXPECT_EQ(rep.to_json().at("verdict"), "unknown");
}

TEST(Iwasawa, TrivialEigenspaceIsConsistent) {
  auto rep = cyclicity_probe(37, 1, ProbeBounds{});
  EXPECT_EQ(rep.order.order, Int(1));
  EXPECT_EQ(rep.verdict, CyclicVerdict::consistent_cyclic);
}

TEST(Iwasawa, KuriharaJoin) {
  auto r = kurihara_report(37, 31);
  EXPECT_TRUE(r.consistent);
  ASSERT_TRUE(r.div.has_value());
  ASSERT_TRUE(r.eigen.has_value());
  EXPECT_EQ(r.div->order, Int(37));
  EXPECT_EQ(r.eigen->order, Int(37));
  for (unsigned n = 1; n < 36; n += 2) EXPECT_TRUE(kurihara_report(37, n).consistent) << n;
}
