#include "monosf/inference.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <thread>

#include "monosf/error.hpp"
#include "monosf/rng.hpp"

namespace monosf {

namespace {

// Runs fn(i) for i in [0, n); results are independent of scheduling because
// every worker writes only its own slots.
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next(0);
  auto worker = [&]() {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
  };
  std::vector<std::thread> pool;
  int n_workers = std::min(threads, n);
  pool.reserve(n_workers);
  for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
}

struct Edge {
  int a, b;                  // superpixel ids, a < b
  int a_slot, b_slot;        // index of this edge in each endpoint's edge list
  const std::vector<PixelCoord>* boundary;
  const TermWeights* weights;
};

}  // namespace

void save_energy_trace(const std::string& path, const std::vector<EnergyTraceRow>& trace) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write energy trace: " + path);
  out.precision(17);
  out << "iteration,total,unary,pairwise\n";
  for (const EnergyTraceRow& row : trace)
    out << row.iteration << "," << row.total << "," << row.unary << "," << row.pairwise << "\n";
}

OptimizeResult optimize(SceneState& state, const InferenceConfig& cfg) {
  if (!cfg.valid()) throw InvalidArgument("optimize: invalid inference config");
  const auto& sps = state.superpixels();
  int n_sp = int(sps.size());
  int n_bodies = int(state.bodies().size());

  // Entry check: every plane must see positive depth at its centroid.
  for (int i = 0; i < n_sp; ++i) {
    double cx = 0, cy = 0;
    for (const PixelCoord& p : sps[i].pixels) {
      cx += p.x;
      cy += p.y;
    }
    cx /= double(sps[i].pixels.size());
    cy /= double(sps[i].pixels.size());
    Vec3 ray = state.intrinsics().inverse_matrix() * Vec3(cx, cy, 1.0);
    if (!(state.planes()[i].n.dot(ray) > 0.0))
      throw InvalidArgument("optimize: plane " + std::to_string(i) +
                            " has non-positive depth at its centroid; state not initialized");
  }

  // Edge list (each adjacency once, a < b) with back references.
  std::vector<Edge> edges;
  std::vector<std::vector<int>> edges_of(n_sp);
  for (int a = 0; a < n_sp; ++a) {
    for (const auto& [b, boundary] : sps[a].neighbors) {
      if (b <= a) continue;
      Edge e{a, b, 0, 0, &boundary, &state.pairwise_weights(sps[a], sps[b])};
      e.a_slot = int(edges_of[a].size());
      e.b_slot = int(edges_of[b].size());
      edges_of[a].push_back(int(edges.size()));
      edges_of[b].push_back(int(edges.size()));
      edges.push_back(e);
    }
  }

  // Pixels per body for the motion phase.
  std::vector<std::vector<int>> sps_of_body(n_bodies);
  for (int i = 0; i < n_sp; ++i) sps_of_body[sps[i].body_id].push_back(i);

  OptimizeResult result;
  EnergyBreakdown e0 = total_energy_breakdown(state);
  result.trace.push_back({0, e0.total(), e0.unary, e0.pairwise});

  int p_n = cfg.normal_particles;
  int p_m = cfg.motion_particles;

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    double scale = std::pow(cfg.decay, iter);

    // ---- Plane phase: particle max-product BP over the superpixel graph ----
    std::vector<std::vector<PlaneParam>> particles(n_sp);
    for (int i = 0; i < n_sp; ++i) {
      particles[i].reserve(p_n);
      particles[i].push_back(state.planes()[i]);  // incumbent is candidate 0
      Rng rng = Rng::derive(cfg.seed, uint64_t(i) + 1, uint64_t(iter) * 2 + 1);
      for (int p = 1; p < p_n; ++p) {
        PlaneParam cand = state.planes()[i];
        double sigma = cfg.normal_sigma * scale;
        cand.n += sigma * Vec3(rng.normal(), rng.normal(), rng.normal());
        particles[i].push_back(cand);
      }
    }

    // Unary tables.
    std::vector<std::vector<double>> unary(n_sp);
    parallel_for(n_sp, cfg.threads, [&](int i) {
      const Superpixel& sp = sps[i];
      const TermWeights& w = state.unary_weights(sp);
      const RigidMotion& motion = state.bodies()[sp.body_id].motion;
      unary[i].assign(particles[i].size(), 0.0);
      for (size_t a = 0; a < particles[i].size(); ++a) {
        double acc = 0.0;
        for (const PixelCoord& p : sp.pixels)
          acc += unary_energy(state, p, particles[i][a], motion, w);
        unary[i][a] = acc;
      }
    });

    // Pairwise tables per edge.
    std::vector<std::vector<double>> pair_cost(edges.size());
    parallel_for(int(edges.size()), cfg.threads, [&](int e) {
      const Edge& edge = edges[e];
      size_t na = particles[edge.a].size(), nb = particles[edge.b].size();
      pair_cost[e].assign(na * nb, 0.0);
      for (size_t a = 0; a < na; ++a)
        for (size_t b = 0; b < nb; ++b)
          pair_cost[e][a * nb + b] = pairwise_energy(state, particles[edge.a][a],
                                                     particles[edge.b][b], *edge.boundary,
                                                     *edge.weights);
    });

    // Messages, min-normalized to 0. msg[e][0..] holds a->b then b->a.
    std::vector<std::vector<double>> msg_ab(edges.size()), msg_ba(edges.size());
    for (size_t e = 0; e < edges.size(); ++e) {
      msg_ab[e].assign(particles[edges[e].b].size(), 0.0);
      msg_ba[e].assign(particles[edges[e].a].size(), 0.0);
    }

    auto send_messages = [&](int i) {
      // Messages from i to each neighbor: min over i's particles of
      // (unary + incoming messages from others + edge cost).
      for (int ei : edges_of[i]) {
        const Edge& edge = edges[ei];
        bool is_a = edge.a == i;
        int other = is_a ? edge.b : edge.a;
        size_t ni = particles[i].size(), no = particles[other].size();
        std::vector<double>& out = is_a ? msg_ab[ei] : msg_ba[ei];
        for (size_t bo = 0; bo < no; ++bo) {
          double best = std::numeric_limits<double>::infinity();
          for (size_t ai = 0; ai < ni; ++ai) {
            double v = unary[i][ai];
            for (int ej : edges_of[i]) {
              if (ej == ei) continue;
              const Edge& in_edge = edges[ej];
              v += (in_edge.a == i) ? msg_ba[ej][ai] : msg_ab[ej][ai];
            }
            const std::vector<double>& pc = pair_cost[ei];
            size_t nb = particles[edge.b].size();
            v += is_a ? pc[ai * nb + bo] : pc[bo * nb + ai];
            best = std::min(best, v);
          }
          out[bo] = best;
        }
        double lo = *std::min_element(out.begin(), out.end());
        for (double& v : out) v -= lo;
      }
    };

    for (int sweep = 0; sweep < cfg.sweeps; ++sweep) {
      for (int i = 0; i < n_sp; ++i) send_messages(i);
      for (int i = n_sp - 1; i >= 0; --i) send_messages(i);
    }

    // Guarded commits in id order: the BP winner is applied only if it does
    // not increase the energy of the terms it touches, so the total is
    // non-increasing even off the tree-exactness assumptions.
    for (int i = 0; i < n_sp; ++i) {
      size_t best = 0;
      double best_belief = std::numeric_limits<double>::infinity();
      for (size_t a = 0; a < particles[i].size(); ++a) {
        double belief = unary[i][a];
        for (int ei : edges_of[i]) {
          const Edge& edge = edges[ei];
          belief += (edge.a == i) ? msg_ba[ei][a] : msg_ab[ei][a];
        }
        if (belief < best_belief - 1e-15) {
          best_belief = belief;
          best = a;
        }
      }
      if (best == 0) continue;
      double incumbent = local_plane_energy(state, i, state.planes()[i]);
      double candidate = local_plane_energy(state, i, particles[i][best]);
      if (candidate <= incumbent) state.plane(i) = particles[i][best];
    }

    // ---- Motion phase: coordinate descent over sampled motion particles ----
    for (int b = 0; b < n_bodies; ++b) {
      if (sps_of_body[b].empty()) continue;
      RigidMotion incumbent = state.bodies()[b].motion;
      std::vector<RigidMotion> candidates;
      candidates.reserve(p_m);
      candidates.push_back(incumbent);
      Rng rng = Rng::derive(cfg.seed, uint64_t(n_sp + b) + 1, uint64_t(iter) * 2 + 2);
      for (int p = 1; p < p_m; ++p) {
        Vec3 dw(rng.normal(), rng.normal(), rng.normal());
        Vec3 dt(rng.normal(), rng.normal(), rng.normal());
        RigidMotion cand;
        cand.rotation = incumbent.rotation * rotation_from_axis_angle(cfg.rot_sigma * scale * dw);
        cand.translation = incumbent.translation + cfg.trans_sigma * scale * dt;
        candidates.push_back(cand);
      }
      std::vector<double> scores(candidates.size(), 0.0);
      parallel_for(int(candidates.size()), cfg.threads, [&](int c) {
        double acc = 0.0;
        for (int i : sps_of_body[b]) {
          const Superpixel& sp = sps[i];
          const TermWeights& w = state.unary_weights(sp);
          for (const PixelCoord& p : sp.pixels)
            acc += unary_energy(state, p, state.planes()[i], candidates[c], w);
        }
        scores[c] = acc;
      });
      size_t best = 0;
      for (size_t c = 1; c < candidates.size(); ++c)
        if (scores[c] < scores[best]) best = c;
      if (best != 0) state.body(b).motion = candidates[best];
    }

    EnergyBreakdown e = total_energy_breakdown(state);
    result.trace.push_back({iter + 1, e.total(), e.unary, e.pairwise});
  }
  return result;
}

}  // namespace monosf
