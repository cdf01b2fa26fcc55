#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dpw/errors.hpp"

namespace dpw {

// One entry of the finite-reflection-group catalog on the 3-sphere.
// `marks` are the dihedral-angle integers along the linear Coxeter diagram
// (rank-1 groups have none).
struct ReflectionGroup {
  std::string name;
  int rank = 0;
  long order = 0;
  std::vector<int> marks;
};

// Catalog lookup.  Parametrized families take m (and n): "D_n", "D_nxZ2"
// use m; "D_mxD_n" uses both.  Throws BadInput for unknown names.
ReflectionGroup reflection_group(const std::string& name, int m = 0, int n = 0);

// The full catalog with parametrized families instantiated at (m, n).
std::vector<ReflectionGroup> reflection_group_catalog(int m, int n);

// A closed cycle of face labels describing how a polygon sits inside an
// r-hedron: entry k is the face containing edge k.
struct PolygonPlacement {
  std::vector<int> cycle;  // labels 1..r
  bool operator==(const PolygonPlacement&) const = default;
  bool operator<(const PolygonPlacement& o) const { return cycle < o.cycle; }
};

// Exhaustive enumeration of admissible placements: every label 1..r occurs,
// no two cyclically adjacent labels are equal, reduced modulo rotation and
// reversal; `marked` distinguishes faces, otherwise placements are further
// reduced modulo relabeling.
std::vector<PolygonPlacement> enumerate_placements(int r, int p, bool marked);

// g = 1 + (|G|/4)(p - 2 - Σ 1/n_k).  Throws NonIntegerGenus when the data
// is inconsistent.
int genus(long group_order, const std::vector<int>& vertex_integers);

struct Umbilic {
  enum class Loc { Vertex, Edge, Face };
  Loc loc = Loc::Face;
  int index = 0;  // vertex or edge index, 0-based; unused for faces
  int order = 0;
};

struct FundamentalPolygon {
  int p = 0;
  std::vector<int> vertex_integers;
  std::vector<int> edge_integers;
  // One entry per vertex is implied with the plain corner order n-2 unless
  // overridden below; edge/face umbilics only when listed.
  std::vector<Umbilic> umbilics;
};

// Sum of umbilic weights; throws ExcessMismatch unless it equals (p-4)/2.
// Returned in half-integer units as a double.
double umbilic_excess(const FundamentalPolygon& poly);

// All admissible umbilic placements of total excess (p-4)/2 on a p-gon with
// the given vertex integers.  Vertex umbilics obey n | o+2; edge and face
// orders are positive.  Orders are bounded by `max_order`.
std::vector<std::vector<Umbilic>> enumerate_umbilic_placements(
    const std::vector<int>& vertex_integers, int max_order = 8);

// Multiset of umbilic orders with multiplicities; zero orders dropped.
struct UmbilicStructure {
  std::map<int, long> mult;  // order -> multiplicity
  bool operator==(const UmbilicStructure&) const = default;
  long total_weight() const;  // Σ multiplicity · order
};

UmbilicStructure umbilic_structure_A(int u, int v);

enum class BVariant { alpha, beta, gamma };

UmbilicStructure umbilic_structure_B(int k, int ell, BVariant variant);

struct Coincidence {
  int u = 0, v = 0;  // A side, u <= v
  int k = 0, ell = 0;
  BVariant variant = BVariant::alpha;
};

// All (A_{u,v}, B^var_{k,ell}) pairs with equal umbilic structures for
// parameters up to `bound`.
std::vector<Coincidence> coincidence_list(int bound = 12);

enum class Verdict { Distinct, Undecided };

struct DistinctnessResult {
  Verdict verdict = Verdict::Undecided;
  std::string reason;  // "umbilic-structure", "divisibility", "edge-integer"
};

DistinctnessResult distinctness_check(int u, int v, int k, int ell,
                                      BVariant variant);

// Genus helpers for the two dihedral families.
int genus_A(int k, int ell);  // (k-1)(ell-1), from the quadrilateral data
int genus_B(int k, int ell);  // (k-1)(ell-1)+k, from the pentagon data

}  // namespace dpw
