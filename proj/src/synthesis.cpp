#include "cdd/synthesis.hpp"

#include <random>
#include <stdexcept>

#include "cdd/parallel.hpp"
#include "cdd/simulator.hpp"

namespace cdd {

std::size_t select_candidate(const std::vector<SynthesisCandidate>& c, double tol, double fidelity_floor) {
  if (c.empty()) throw std::invalid_argument("select_candidate: no candidates");
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i].infidelity <= tol) pool.push_back(i);
  }
  if (pool.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < c.size(); ++i) {
      if (c[i].infidelity < c[best].infidelity) best = i;
    }
    return best;
  }
  std::optional<std::size_t> cheapest, most_protective;
  for (std::size_t i : pool) {
    if (c[i].fidelity >= fidelity_floor && (!cheapest || c[i].energy < c[*cheapest].energy)) cheapest = i;
    if (!most_protective || c[i].fidelity > c[*most_protective].fidelity) most_protective = i;
  }
  return cheapest ? *cheapest : *most_protective;
}

SynthesisResult synthesize(const Mat2& target, const NoiseParams& p, const SynthesisSettings& s) {
  if (s.starts < 1 && !s.predicted) throw std::invalid_argument("synthesize: need at least one start");
  s.schedule.validate();
  const NoiseTable noise(p, s.grid_n);
  const Mat2 plus = 0.5 * (identity2() + pauli(0));

  std::vector<std::optional<GammaVector>> seeds;
  if (s.predicted) seeds.emplace_back();
  std::mt19937_64 rng(s.seed);
  std::normal_distribution<double> nd(0.0, s.start_spread);
  const GammaVector guess = initial_guess(target, s.schedule.q_in, p);
  for (int k = 0; k < s.starts; ++k) {
    GammaVector g = guess;
    if (k > 0) {
      for (double& v : g.c) v += nd(rng);
    }
    seeds.emplace_back(g);
  }

  std::vector<SynthesisCandidate> cands(seeds.size());
  parallel_for(seeds.size(), s.jobs, [&](std::size_t i) {
    SynthesisCandidate& c = cands[i];
    GeodesicSolution sol;
    if (!seeds[i]) {
      c.start = -1;
      const RefineResult r = refine_costate(*s.predicted, target, kSubRiemannian, noise, s.tol, {}, {}, true);
      sol = propagate_sub(r.costate, noise, &target);
    } else {
      c.start = static_cast<int>(i) - (s.predicted ? 1 : 0);
      QJumpOptions o;
      o.tol = s.tol;
      o.seed = seeds[i];
      sol = q_jump(target, noise, s.schedule, o).solution;
    }
    c.costate = sol.costate0;
    c.infidelity = sol.achieved_infidelity;
    c.energy = energy_cost(sol.control);
    c.fidelity = fidelity_t(solve_master_dephasing(sol.control, p, plus), plus).back();
  });

  SynthesisResult res;
  res.candidates = cands;
  res.chosen = select_candidate(cands, s.tol, s.fidelity_floor);
  res.solution = propagate_sub(cands[res.chosen].costate, noise, &target);
  res.within_tol = res.solution.achieved_infidelity <= s.tol;
  return res;
}

}  // namespace cdd
