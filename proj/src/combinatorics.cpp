#include "dpw/combinatorics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace dpw {

ReflectionGroup reflection_group(const std::string& name, int m, int n) {
  auto need = [&](bool ok) {
    if (!ok) throw BadInput("reflection_group: bad parameters for " + name);
  };
  if (name == "trivial") return {name, 0, 1, {}};
  if (name == "Z2") return {name, 1, 2, {}};
  if (name == "D_n") {
    need(m >= 1);
    return {name, 2, 2L * m, {m}};
  }
  if (name == "D_nxZ2") {
    need(m >= 1);
    return {name, 3, 4L * m, {m}};
  }
  if (name == "tet") return {name, 3, 24, {3, 3}};
  if (name == "oct") return {name, 3, 48, {3, 4}};
  if (name == "ico") return {name, 3, 120, {3, 5}};
  if (name == "D_mxD_n") {
    need(m >= 1 && n >= 1);
    return {name, 4, 4L * m * n, {m, n}};
  }
  if (name == "tetxZ2") return {name, 4, 48, {3, 3}};
  if (name == "octxZ2") return {name, 4, 96, {3, 4}};
  if (name == "icoxZ2") return {name, 4, 240, {3, 5}};
  if (name == "cell5") return {name, 4, 120, {3, 3, 3}};
  if (name == "demitesseract") return {name, 4, 192, {3, 3, 3}};
  if (name == "cell16") return {name, 4, 384, {3, 3, 4}};
  if (name == "cell24") return {name, 4, 1152, {3, 4, 3}};
  if (name == "cell600") return {name, 4, 14400, {3, 3, 5}};
  throw BadInput("reflection_group: unknown name " + name);
}

std::vector<ReflectionGroup> reflection_group_catalog(int m, int n) {
  std::vector<ReflectionGroup> out;
  for (const char* name :
       {"trivial", "Z2", "D_n", "D_nxZ2", "tet", "oct", "ico", "D_mxD_n",
        "tetxZ2", "octxZ2", "icoxZ2", "cell5", "demitesseract", "cell16",
        "cell24", "cell600"})
    out.push_back(reflection_group(name, m, n));
  return out;
}

namespace {

std::vector<int> rotate_cycle(const std::vector<int>& c, size_t s) {
  std::vector<int> r(c.size());
  for (size_t i = 0; i < c.size(); ++i) r[i] = c[(i + s) % c.size()];
  return r;
}

// Lexicographically least representative under rotation and reversal.
std::vector<int> canonical_cycle(std::vector<int> c) {
  std::vector<int> best = c;
  for (int rev = 0; rev < 2; ++rev) {
    for (size_t s = 0; s < c.size(); ++s) best = std::min(best, rotate_cycle(c, s));
    std::reverse(c.begin(), c.end());
  }
  return best;
}

// Canonical form additionally modulo relabeling: relabel faces in order of
// first appearance, over all rotations/reversals, take the least.
std::vector<int> canonical_cycle_unmarked(const std::vector<int>& c) {
  std::vector<int> best;
  std::vector<int> cur = c;
  for (int rev = 0; rev < 2; ++rev) {
    for (size_t s = 0; s < cur.size(); ++s) {
      std::vector<int> rot = rotate_cycle(cur, s);
      std::map<int, int> relabel;
      int next = 1;
      for (auto& x : rot) {
        auto [it, fresh] = relabel.try_emplace(x, next);
        if (fresh) ++next;
        x = it->second;
      }
      if (best.empty() || rot < best) best = rot;
    }
    std::reverse(cur.begin(), cur.end());
  }
  return best;
}

}  // namespace

std::vector<PolygonPlacement> enumerate_placements(int r, int p, bool marked) {
  if (p > 5) throw UnsupportedSize("enumerate_placements: p > 5");
  if (r < 2 || r > 4 || p < 3) throw BadInput("enumerate_placements: bad r or p");
  std::set<std::vector<int>> seen;
  std::vector<int> c(static_cast<size_t>(p), 1);
  // Odometer over all label sequences.
  while (true) {
    bool ok = true;
    for (int i = 0; i < p && ok; ++i)
      if (c[static_cast<size_t>(i)] == c[static_cast<size_t>((i + 1) % p)]) ok = false;
    if (ok) {
      std::set<int> used(c.begin(), c.end());
      if (static_cast<int>(used.size()) == r)
        seen.insert(marked ? canonical_cycle(c) : canonical_cycle_unmarked(c));
    }
    int i = p - 1;
    while (i >= 0 && c[static_cast<size_t>(i)] == r) c[static_cast<size_t>(i--)] = 1;
    if (i < 0) break;
    ++c[static_cast<size_t>(i)];
  }
  std::vector<PolygonPlacement> out;
  for (const auto& v : seen) out.push_back({v});
  return out;
}

int genus(long group_order, const std::vector<int>& vertex_integers) {
  int p = static_cast<int>(vertex_integers.size());
  if (p < 3 || group_order <= 0) throw BadInput("genus: bad input");
  // g = 1 + (|G|/4)(p - 2 - Σ 1/n_k), evaluated exactly over a common
  // denominator to detect non-integer results.
  long denom = 1;
  for (int n : vertex_integers) {
    if (n < 1) throw BadInput("genus: vertex integer < 1");
    denom = std::lcm(denom, static_cast<long>(n));
  }
  long sum_inv = 0;  // Σ denom/n_k
  for (int n : vertex_integers) sum_inv += denom / n;
  // numerator of (p - 2 - Σ 1/n) over denom
  long num = (static_cast<long>(p) - 2) * denom - sum_inv;
  long total_num = group_order * num;  // g-1 times 4*denom
  if (total_num % (4 * denom) != 0)
    throw NonIntegerGenus("genus: |G|(p-2-Σ1/n)/4 not an integer");
  long g = 1 + total_num / (4 * denom);
  if (g < 0) throw NonIntegerGenus("genus: negative result");
  return static_cast<int>(g);
}

double umbilic_excess(const FundamentalPolygon& poly) {
  int p = poly.p;
  if (p < 3 || static_cast<int>(poly.vertex_integers.size()) != p)
    throw BadInput("umbilic_excess: inconsistent polygon");
  // Start from plain corners (order n-2, weight 0) and apply overrides.
  std::vector<int> vertex_order(static_cast<size_t>(p));
  for (int i = 0; i < p; ++i)
    vertex_order[static_cast<size_t>(i)] = poly.vertex_integers[static_cast<size_t>(i)] - 2;
  double kappa = 0.0;
  for (const auto& u : poly.umbilics) {
    switch (u.loc) {
      case Umbilic::Loc::Vertex:
        if (u.index < 0 || u.index >= p) throw BadInput("umbilic_excess: vertex index");
        vertex_order[static_cast<size_t>(u.index)] = u.order;
        break;
      case Umbilic::Loc::Edge:
        if (u.order < 1) throw BadInput("umbilic_excess: edge order < 1");
        kappa += u.order / 2.0;
        break;
      case Umbilic::Loc::Face:
        if (u.order < 1) throw BadInput("umbilic_excess: face order < 1");
        kappa += u.order;
        break;
    }
  }
  for (int i = 0; i < p; ++i) {
    int n = poly.vertex_integers[static_cast<size_t>(i)];
    int o = vertex_order[static_cast<size_t>(i)];
    if (o < 0) throw BadInput("umbilic_excess: negative vertex order");
    kappa += static_cast<double>(o + 2 - n) / (2.0 * n);
  }
  double target = (p - 4) / 2.0;
  if (std::abs(kappa - target) > 1e-12)
    throw ExcessMismatch("umbilic_excess: total " + std::to_string(kappa) +
                         " != (p-4)/2 = " + std::to_string(target));
  return kappa;
}

std::vector<std::vector<Umbilic>> enumerate_umbilic_placements(
    const std::vector<int>& vertex_integers, int max_order) {
  int p = static_cast<int>(vertex_integers.size());
  // Weights in quarter units to keep the search integral: vertex weight
  // (o+2-n)/(2n), edge o/2, face o.  Common denominator 4·lcm(n_k).
  long denom = 4;
  for (int n : vertex_integers) denom = std::lcm(denom, 4L * n);
  long target = denom * (p - 4) / 2;

  std::vector<std::vector<Umbilic>> out;
  // Candidate vertex orders: n | o+2, o in [n-2, max_order].
  std::vector<std::vector<int>> vchoice(static_cast<size_t>(p));
  for (int i = 0; i < p; ++i) {
    int n = vertex_integers[static_cast<size_t>(i)];
    for (int o = n - 2; o <= max_order; ++o)
      if ((o + 2) % n == 0) vchoice[static_cast<size_t>(i)].push_back(o);
  }
  std::vector<int> pick(static_cast<size_t>(p), 0);
  // Enumerate vertex orders, then distribute the remaining excess over
  // edges and the face.
  auto rec = [&](auto&& self, int i, long acc) -> void {
    if (acc > target) return;
    if (i == p) {
      long rem = target - acc;
      // edges: composition of rem into p nonneg multiples of denom/2,
      // face: one multiple of denom.  Keep it simple: enumerate total edge
      // order e_tot and face order f with (denom/2)e_tot + denom f = rem.
      for (long f = 0; denom * f <= rem; ++f) {
        long e_units = rem - denom * f;
        if (e_units % (denom / 2) != 0) continue;
        long e_tot = e_units / (denom / 2);
        if (e_tot > static_cast<long>(max_order) * p) continue;
        // distribute e_tot over p edges
        std::vector<int> edge(static_cast<size_t>(p), 0);
        auto dist = [&](auto&& dself, int j, long left) -> void {
          if (j == p - 1) {
            if (left > max_order) return;
            edge[static_cast<size_t>(j)] = static_cast<int>(left);
            std::vector<Umbilic> cfg;
            for (int k = 0; k < p; ++k) {
              int n = vertex_integers[static_cast<size_t>(k)];
              if (pick[static_cast<size_t>(k)] != n - 2)
                cfg.push_back({Umbilic::Loc::Vertex, k, pick[static_cast<size_t>(k)]});
            }
            for (int k = 0; k < p; ++k)
              if (edge[static_cast<size_t>(k)] > 0)
                cfg.push_back({Umbilic::Loc::Edge, k, edge[static_cast<size_t>(k)]});
            if (f > 0) cfg.push_back({Umbilic::Loc::Face, 0, static_cast<int>(f)});
            out.push_back(std::move(cfg));
            return;
          }
          for (long o = 0; o <= std::min<long>(left, max_order); ++o) {
            edge[static_cast<size_t>(j)] = static_cast<int>(o);
            dself(dself, j + 1, left - o);
          }
        };
        dist(dist, 0, e_tot);
      }
      return;
    }
    int n = vertex_integers[static_cast<size_t>(i)];
    for (int o : vchoice[static_cast<size_t>(i)]) {
      pick[static_cast<size_t>(i)] = o;
      long w = static_cast<long>(o + 2 - n) * (denom / (2L * n));
      self(self, i + 1, acc + w);
    }
  };
  rec(rec, 0, 0);
  return out;
}

long UmbilicStructure::total_weight() const {
  long s = 0;
  for (const auto& [o, m] : mult) s += o * m;
  return s;
}

namespace {
void add_term(UmbilicStructure& s, long multiplicity, int order) {
  if (order <= 0 || multiplicity <= 0) return;
  s.mult[order] += multiplicity;
}
}  // namespace

UmbilicStructure umbilic_structure_A(int u, int v) {
  if (u < 2 || v < 2) throw BadInput("umbilic_structure_A: u,v >= 2");
  UmbilicStructure s;
  add_term(s, 2L * v, u - 2);
  add_term(s, 2L * u, v - 2);
  return s;
}

UmbilicStructure umbilic_structure_B(int k, int ell, BVariant variant) {
  if (k < 2 || ell < 1) throw BadInput("umbilic_structure_B: k >= 2, ell >= 1");
  UmbilicStructure s;
  switch (variant) {
    case BVariant::alpha:
      add_term(s, 2L * k * ell, 1);
      add_term(s, 2L * ell, k - 2);
      break;
    case BVariant::beta:
      add_term(s, static_cast<long>(k) * ell, 2);
      add_term(s, 2L * ell, k - 2);
      break;
    case BVariant::gamma:
      if (k <= 2) throw VariantInvalid("umbilic_structure_B: gamma needs k > 2");
      add_term(s, 2L * ell, 2 * k - 2);
      break;
  }
  return s;
}

std::vector<Coincidence> coincidence_list(int bound) {
  std::vector<Coincidence> out;
  for (int u = 2; u <= bound; ++u)
    for (int v = u; v <= bound; ++v) {
      UmbilicStructure a = umbilic_structure_A(u, v);
      for (int k = 2; k <= bound; ++k)
        for (int ell = 1; ell <= bound; ++ell)
          for (BVariant var : {BVariant::alpha, BVariant::beta, BVariant::gamma}) {
            if (var == BVariant::gamma && k <= 2) continue;
            if (umbilic_structure_B(k, ell, var) == a)
              out.push_back({u, v, k, ell, var});
          }
    }
  return out;
}

DistinctnessResult distinctness_check(int u, int v, int k, int ell,
                                      BVariant variant) {
  if (umbilic_structure_A(u, v) != umbilic_structure_B(k, ell, variant))
    return {Verdict::Distinct, "umbilic-structure"};
  // Small cases the classification theorem leaves open.
  if ((k == 2 && ell == 1) || (k == 2 && ell == 2))
    return {Verdict::Undecided, "excluded-small-case"};
  // Symmetry-group containment requires D_k x D_ell to embed compatibly.
  bool divides = (u % k == 0 && v % ell == 0) || (v % k == 0 && u % ell == 0);
  if (!divides) return {Verdict::Distinct, "divisibility"};
  if (variant == BVariant::gamma)
    return {Verdict::Distinct, "edge-integer"};
  return {Verdict::Undecided, ""};
}

int genus_A(int k, int ell) {
  return genus(reflection_group("D_mxD_n", k, ell).order, {k, 2, ell, 2});
}

int genus_B(int k, int ell) {
  long order = 4L * k * ell;  // D_k x D_ell; D_k x Z2 at ell = 1
  return genus(order, {k, 2, 2, 2, 2});
}

}  // namespace dpw
