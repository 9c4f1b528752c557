#include <cmath>
#include <vector>

#include <catch_amalgamated.hpp>

#include "maucl/loss.hpp"
#include "maucl/rng.hpp"

using namespace maucl;

namespace {

BatchView view_of(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels,
                  std::size_t n, std::size_t K) {
  return BatchView{scores, labels, n, K};
}

// Literal term-by-term summation of the per-class empirical risk, kept
// independent of the implementation path it checks.
double brute_class_risk(const std::vector<double>& f, const std::vector<std::uint8_t>& y,
                        double w_pos, double w_neg, double dp, double dn, BaseKind base) {
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (y[i])
      acc += w_pos * base_loss(f[i] - dp, base);
    else
      acc += w_neg * base_loss(-f[i] - dn, base);
  }
  return acc;
}

LossSpec hinge_spec(LossKind kind = LossKind::rldam) { return LossSpec{kind, BaseKind::hinge, 0.0, false}; }

}  // namespace

TEST_CASE("base losses at reference points") {
  REQUIRE(base_loss(1.0, BaseKind::hinge) == 0.0);
  REQUIRE(base_loss(-0.1, BaseKind::hinge) == Catch::Approx(1.1));
  REQUIRE(base_loss(0.0, BaseKind::logistic) == Catch::Approx(std::log(2.0)));
  REQUIRE(base_loss(100.0, BaseKind::logistic) < 1e-12);
  REQUIRE(std::isfinite(base_loss(-1000.0, BaseKind::logistic)));
  REQUIRE(base_loss(-1000.0, BaseKind::logistic) == Catch::Approx(1000.0).margin(1e-9));
}

TEST_CASE("hinge subgradient convention at the kink") {
  REQUIRE(base_loss_grad(1.0, BaseKind::hinge) == 0.0);
  REQUIRE(base_loss_grad(0.999, BaseKind::hinge) == -1.0);
  REQUIRE(base_loss_grad(1.001, BaseKind::hinge) == 0.0);
}

TEST_CASE("build_margins follows the fourth-root rule") {
  const MarginSchedule s = build_margins({{0, 16}}, 1.0);
  REQUIRE(s.pos(0) == Catch::Approx(0.5));
  REQUIRE(s.neg(0) == Catch::Approx(0.5));

  const MarginSchedule z = build_margins({{0, 16}, {1, 3}}, 0.0);
  REQUIRE(z.pos(0) == 0.0);
  REQUIRE(z.pos(1) == 0.0);

  const MarginSchedule u = build_margins({{5, 1}}, 2.0);
  REQUIRE(u.pos(5) == Catch::Approx(2.0));

  REQUIRE_THROWS_AS(build_margins({{0, 0}}, 1.0), std::invalid_argument);
}

TEST_CASE("margins strictly decrease in the positive count") {
  const MarginSchedule s = build_margins({{0, 3}, {1, 300}}, 0.7);
  REQUIRE(s.pos(0) > s.pos(1));
}

TEST_CASE("rldam_pair hand values") {
  MarginSchedule sched;
  sched.delta_pos[2] = 0.5;
  sched.delta_neg[2] = 0.5;
  const LossSpec spec = hinge_spec();
  // l(0.7-0.5) + l(0.4-0.5) = l(0.2) + l(-0.1) = 0.8 + 1.1
  REQUIRE(rldam_pair(0.7, -0.4, 2, sched, spec) == Catch::Approx(1.9));
  // both hinges inactive
  REQUIRE(rldam_pair(2.0, -2.0, 2, sched, spec) == 0.0);
}

TEST_CASE("zero margins reduce the pair loss to RU") {
  MarginSchedule zero;
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const double fp = rng.normal(), fn = rng.normal();
    for (BaseKind base : {BaseKind::hinge, BaseKind::logistic}) {
      LossSpec rm{LossKind::rldam, base, 0.0, false};
      LossSpec ru{LossKind::ru, base, 0.0, false};
      REQUIRE(rldam_pair(fp, fn, 0, zero, rm) ==
              base_loss(fp, base) + base_loss(-fn, base));
      REQUIRE(rldam_pair(fp, fn, 0, zero, rm) == rldam_pair(fp, fn, 0, zero, ru));
    }
  }
}

TEST_CASE("class_risk hand value") {
  // n=3, y=[1,0,0], f=[0.5,-0.5,1.0], hinge, view-count weights:
  // 1*l(0.5) + 1/2*(l(0.5) + l(-1.0)) = 0.5 + 0.5*(0.5+2.0) = 1.75
  const std::vector<double> f = {0.5, -0.5, 1.0};
  const std::vector<std::uint8_t> y = {1, 0, 0};
  WeightEntry w{1.0, 0.5, 1, 2};
  const ClassRiskResult r = class_risk({f, y}, w, 0, MarginSchedule{}, hinge_spec());
  REQUIRE(r.value == Catch::Approx(1.75));
  REQUIRE_FALSE(r.degenerate());
}

TEST_CASE("class_risk agrees with brute-force summation") {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.uniform_below(12);
    std::vector<double> f(n);
    std::vector<std::uint8_t> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      f[i] = 3.0 * rng.normal();
      y[i] = rng.bernoulli(0.4) ? 1 : 0;
    }
    const double dp = rng.uniform01(), dn = rng.uniform01();
    const double wp = rng.uniform01() + 0.1, wn = rng.uniform01() + 0.1;
    MarginSchedule sched;
    sched.delta_pos[0] = dp;
    sched.delta_neg[0] = dn;
    for (BaseKind base : {BaseKind::hinge, BaseKind::logistic}) {
      LossSpec spec{LossKind::rldam, base, 1.0, false};
      WeightEntry w{wp, wn, 1, 1};
      const double got = class_risk({f, y}, w, 0, sched, spec).value;
      const double want = brute_class_risk(f, y, wp, wn, dp, dn, base);
      REQUIRE(got == Catch::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("huge scores drive the negative side, oracle verified") {
  const std::vector<double> f = {1e6, 1e6, 1e6};
  const std::vector<std::uint8_t> y = {1, 0, 0};
  MarginSchedule sched;
  sched.delta_pos[0] = 0.5;
  sched.delta_neg[0] = 0.5;
  WeightEntry w{1.0, 0.5, 1, 2};
  const double got = class_risk({f, y}, w, 0, sched, hinge_spec()).value;
  const double want = brute_class_risk(f, y, 1.0, 0.5, 0.5, 0.5, BaseKind::hinge);
  REQUIRE(got == Catch::Approx(want));
  REQUIRE(got > 1e5);  // negative side blows up, positive side is 0
}

TEST_CASE("empty positive side contributes zero and raises the flag") {
  const std::vector<double> f = {0.2, -0.3};
  const std::vector<std::uint8_t> y = {0, 0};
  WeightEntry w{0.0, 0.5, 0, 2};
  const ClassRiskResult r = class_risk({f, y}, w, 0, MarginSchedule{}, hinge_spec());
  REQUIRE(r.pos_empty);
  REQUIRE_FALSE(r.neg_empty);
  REQUIRE(r.value == Catch::Approx(0.5 * (base_loss(-0.2, BaseKind::hinge) +
                                          base_loss(0.3, BaseKind::hinge))));
}

TEST_CASE("task_risk averages class risks and drops degenerate classes") {
  // Two classes over 4 examples; class 1 has no positives -> dropped.
  const std::size_t n = 4, K = 2;
  std::vector<double> scores = {0.5, 0.0, -0.5, 0.0, 1.0, 0.0, -1.0, 0.0};
  std::vector<std::uint8_t> labels = {1, 0, 0, 0, 1, 0, 0, 0};
  const BatchView v = view_of(scores, labels, n, K);
  const ClassWeights w = weights_from_batch(v, {0, 1});
  const TaskRiskResult r = task_risk(v, {0, 1}, w, MarginSchedule{}, hinge_spec());
  REQUIRE(r.used == 1);
  REQUIRE(r.dropped == std::vector<int>{1});

  // one remaining class -> equals that class risk
  std::vector<double> f0 = {0.5, -0.5, 1.0, -1.0};
  std::vector<std::uint8_t> y0 = {1, 0, 1, 0};
  // mean of two class risks is the arithmetic mean
  std::vector<double> s2(4 * 2);
  std::vector<std::uint8_t> l2(4 * 2);
  for (std::size_t i = 0; i < 4; ++i) {
    s2[i * 2 + 0] = f0[i];
    s2[i * 2 + 1] = -f0[i];
    l2[i * 2 + 0] = y0[i];
    l2[i * 2 + 1] = y0[i];
  }
  const BatchView v2 = view_of(s2, l2, 4, 2);
  const ClassWeights w2 = weights_from_batch(v2, {0, 1});
  const TaskRiskResult r2 = task_risk(v2, {0, 1}, w2, MarginSchedule{}, hinge_spec());
  const double c0 = class_risk({f0, y0}, w2.get(0), 0, MarginSchedule{}, hinge_spec()).value;
  std::vector<double> f1(4);
  for (std::size_t i = 0; i < 4; ++i) f1[i] = -f0[i];
  const double c1 = class_risk({f1, y0}, w2.get(1), 1, MarginSchedule{}, hinge_spec()).value;
  REQUIRE(r2.value == Catch::Approx((c0 + c1) / 2.0));
}

TEST_CASE("task_risk with every class degenerate is an error") {
  std::vector<double> scores = {0.1, 0.2};
  std::vector<std::uint8_t> labels = {1, 1};  // no negatives for the one class
  const BatchView v = view_of(scores, labels, 2, 1);
  const ClassWeights w = weights_from_batch(v, {0});
  REQUIRE_THROWS_AS(task_risk(v, {0}, w, MarginSchedule{}, hinge_spec()), std::runtime_error);
}

TEST_CASE("adjusted continual risk is the mean over tasks") {
  REQUIRE(adjusted_cl_risk(2.0, std::vector<double>{}) == 2.0);
  const std::vector<double> mem = {1.0, 3.0};
  REQUIRE(adjusted_cl_risk(2.0, mem) == Catch::Approx(2.0));
  const std::vector<double> zeros = {0.0, 0.0, 0.0};
  REQUIRE(adjusted_cl_risk(2.0, zeros) == Catch::Approx(0.5));
}

TEST_CASE("bce reference values") {
  std::vector<double> scores = {0.0};
  std::vector<std::uint8_t> labels = {1};
  REQUIRE(bce_risk(view_of(scores, labels, 1, 1), {0}) == Catch::Approx(std::log(2.0)));

  scores = {30.0};
  REQUIRE(bce_risk(view_of(scores, labels, 1, 1), {0}) < 1e-12);
}

TEST_CASE("bce is symmetric under score negation with flipped labels") {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.uniform_below(8);
    std::vector<double> s(n), sneg(n);
    std::vector<std::uint8_t> y(n), yflip(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = 5.0 * rng.normal();
      sneg[i] = -s[i];
      y[i] = rng.bernoulli(0.5) ? 1 : 0;
      yflip[i] = y[i] ? 0 : 1;
    }
    REQUIRE(bce_risk(view_of(s, y, n, 1), {0}) ==
            Catch::Approx(bce_risk(view_of(sneg, yflip, n, 1), {0})).epsilon(1e-14));
  }
}

TEST_CASE("raising a positive score never raises class risk, and vice versa") {
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.uniform_below(8);
    std::vector<double> f(n);
    std::vector<std::uint8_t> y(n);
    y[0] = 1;
    y[1] = 0;
    for (std::size_t i = 0; i < n; ++i) {
      f[i] = 2.0 * rng.normal();
      if (i >= 2) y[i] = rng.bernoulli(0.5) ? 1 : 0;
    }
    MarginSchedule sched;
    sched.delta_pos[0] = rng.uniform01();
    sched.delta_neg[0] = rng.uniform01();
    WeightEntry w{0.7, 0.3, 1, 1};
    const std::size_t i = rng.uniform_below(n);
    const double bump = rng.uniform01() + 0.01;
    for (BaseKind base : {BaseKind::hinge, BaseKind::logistic}) {
      LossSpec spec{LossKind::rldam, base, 1.0, false};
      const double before = class_risk({f, y}, w, 0, sched, spec).value;
      std::vector<double> g = f;
      g[i] += bump;
      const double after = class_risk({g, y}, w, 0, sched, spec).value;
      if (y[i])
        REQUIRE(after <= before + 1e-15);
      else
        REQUIRE(after >= before - 1e-15);
    }
  }
}

TEST_CASE("normalized margin variant scales the hinge slope") {
  MarginSchedule sched;
  sched.delta_pos[0] = 0.5;
  sched.delta_neg[0] = 0.5;
  LossSpec norm{LossKind::rldam, BaseKind::hinge, 1.0, true};
  // positive term: l((f - 0.5)/0.5); at f = 0 -> l(-1) = 2
  const std::vector<double> f = {0.0, 0.0};
  const std::vector<std::uint8_t> y = {1, 0};
  WeightEntry w{1.0, 1.0, 1, 1};
  const double r = class_risk({f, y}, w, 0, sched, norm).value;
  REQUIRE(r == Catch::Approx(2.0 + 2.0));
  // with zero margins the flag is inert and the literal hinge applies
  LossSpec norm_zero{LossKind::rldam, BaseKind::hinge, 0.0, true};
  const double rz = class_risk({f, y}, w, 0, MarginSchedule{}, norm_zero).value;
  REQUIRE(rz == Catch::Approx(2.0));
}

namespace {

struct GradProblem {
  std::size_t n;
  std::size_t K;
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  std::vector<int> class_set;
  ClassWeights weights;
  MarginSchedule sched;
};

GradProblem random_problem(Rng& rng, LossKind kind, BaseKind base) {
  GradProblem p;
  p.n = 3 + rng.uniform_below(8);
  p.K = 1 + rng.uniform_below(4);
  p.scores.resize(p.n * p.K);
  p.labels.resize(p.n * p.K);
  for (std::size_t k = 0; k < p.K; ++k) p.class_set.push_back(static_cast<int>(k));
  for (auto& s : p.scores) s = 2.0 * rng.normal();
  // guarantee both sides for each class so nothing is degenerate
  for (std::size_t k = 0; k < p.K; ++k) {
    for (std::size_t i = 0; i < p.n; ++i) p.labels[i * p.K + k] = rng.bernoulli(0.5) ? 1 : 0;
    p.labels[0 * p.K + k] = 1;
    p.labels[1 * p.K + k] = 0;
  }
  std::map<int, long> counts;
  for (int k : p.class_set) counts[k] = 1 + static_cast<long>(rng.uniform_below(20));
  p.sched = build_margins(counts, kind == LossKind::rldam ? 0.8 : 0.0);
  BatchView v{p.scores, p.labels, p.n, p.K};
  p.weights = weights_from_batch(v, p.class_set);
  return p;
}

bool near_hinge_kink(const GradProblem& p, const LossSpec& spec) {
  if (spec.base != BaseKind::hinge) return false;
  for (std::size_t i = 0; i < p.n; ++i)
    for (int k : p.class_set) {
      const double f = p.scores[i * p.K + static_cast<std::size_t>(k)];
      const double dp = spec.kind == LossKind::rldam ? p.sched.pos(k) : 0.0;
      const double dn = spec.kind == LossKind::rldam ? p.sched.neg(k) : 0.0;
      const double z = p.labels[i * p.K + static_cast<std::size_t>(k)] ? f - dp : -f - dn;
      if (std::abs(1.0 - z) < 1e-3) return true;
    }
  return false;
}

double eval_risk(const GradProblem& p, const LossSpec& spec, const std::vector<double>& scores) {
  BatchView v{scores, p.labels, p.n, p.K};
  return task_risk(v, p.class_set, p.weights, p.sched, spec).value;
}

}  // namespace

TEST_CASE("analytic task-risk gradients match central finite differences") {
  const double h = 1e-5;
  struct Kind {
    LossKind loss;
    BaseKind base;
  };
  const std::vector<Kind> kinds = {{LossKind::rldam, BaseKind::hinge},
                                   {LossKind::rldam, BaseKind::logistic},
                                   {LossKind::ru, BaseKind::hinge},
                                   {LossKind::ru, BaseKind::logistic},
                                   {LossKind::bce, BaseKind::logistic}};
  Rng rng(2024);
  for (const Kind& kc : kinds) {
    const LossSpec spec{kc.loss, kc.base, kc.loss == LossKind::rldam ? 0.8 : 0.0, false};
    int done = 0;
    while (done < 30) {
      GradProblem p = random_problem(rng, kc.loss, kc.base);
      if (near_hinge_kink(p, spec)) continue;
      std::vector<double> grad(p.scores.size(), 0.0);
      BatchView v{p.scores, p.labels, p.n, p.K};
      task_risk_grad(v, p.class_set, p.weights, p.sched, spec, grad);

      double num = 0.0, den = 0.0;
      std::vector<double> fd(p.scores.size(), 0.0);
      std::vector<double> work = p.scores;
      for (std::size_t c = 0; c < p.scores.size(); ++c) {
        work[c] = p.scores[c] + h;
        const double up = eval_risk(p, spec, work);
        work[c] = p.scores[c] - h;
        const double dn = eval_risk(p, spec, work);
        work[c] = p.scores[c];
        fd[c] = (up - dn) / (2.0 * h);
      }
      for (std::size_t c = 0; c < fd.size(); ++c) {
        num += (grad[c] - fd[c]) * (grad[c] - fd[c]);
        den += std::max(grad[c] * grad[c], fd[c] * fd[c]);
      }
      const double rel = std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
      REQUIRE(rel < 1e-5);
      ++done;
    }
  }
}

TEST_CASE("lambda zero makes RLDAM bit-identical to RU") {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    GradProblem p = random_problem(rng, LossKind::ru, BaseKind::hinge);
    const LossSpec rm{LossKind::rldam, BaseKind::hinge, 0.0, false};
    const LossSpec ru{LossKind::ru, BaseKind::hinge, 0.0, false};
    MarginSchedule zero_sched = build_margins({{0, 5}, {1, 9}, {2, 2}, {3, 7}}, 0.0);
    BatchView v{p.scores, p.labels, p.n, p.K};
    std::vector<double> ga(p.scores.size(), 0.0), gb(p.scores.size(), 0.0);
    const double ra = task_risk_grad(v, p.class_set, p.weights, zero_sched, rm, ga).value;
    const double rb = task_risk_grad(v, p.class_set, p.weights, zero_sched, ru, gb).value;
    REQUIRE(ra == rb);
    REQUIRE(ga == gb);
  }
}
