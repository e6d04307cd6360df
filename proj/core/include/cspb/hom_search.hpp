#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "cspb/structure.hpp"

namespace cspb {

struct SearchLimits {
    // Backtracking node budget; exceeding it raises ResourceError.
    std::int64_t max_nodes = 1'000'000;
};

// Complete backtracking search with unary seeding and one-unassigned-left
// tuple pruning. Deterministic: source elements are assigned in domain
// order, candidate targets tried in domain order.
std::optional<Homomorphism> find_homomorphism(const Structure& a, const Structure& b,
                                              const SearchLimits& limits = {});

// Same search with a partial assignment pinned in advance.
std::optional<Homomorphism> find_homomorphism_extending(
    const Structure& a, const Structure& b, const std::map<std::string, std::string>& pins,
    const SearchLimits& limits = {});

// All homomorphisms a -> b, in lexicographic assignment order. Intended for
// desk-scale inputs; the node budget still applies.
std::vector<std::map<std::string, std::string>> all_homomorphisms(const Structure& a,
                                                                  const Structure& b,
                                                                  const SearchLimits& limits = {});

bool homomorphic(const Structure& a, const Structure& b, const SearchLimits& limits = {});

// Isomorphism via backtracking over bijections with degree-profile pruning.
std::optional<std::map<std::string, std::string>> find_isomorphism(const Structure& a,
                                                                   const Structure& b,
                                                                   const SearchLimits& limits = {});
bool isomorphic(const Structure& a, const Structure& b, const SearchLimits& limits = {});

struct CoreResult {
    Structure core;
    Homomorphism retraction; // from the input onto the core; identity on it
};

// Smallest retract, computed by brute force: shrink by non-surjective
// endomorphisms until no proper retraction exists, then return the
// lexicographically least sub-universe of that size carrying a retraction.
// Guarded: |domain| must be <= max_domain (default 12).
struct CoreLimits {
    int max_domain = 12;
    SearchLimits search;
};
CoreResult core_of(const Structure& a, const CoreLimits& limits = {});

// A finitary operation on an ordered finite set, given by a full table in
// lexicographic argument order.
class Operation {
  public:
    Operation(std::vector<std::string> domain, int arity, std::vector<int> table);

    static Operation from_function(std::vector<std::string> domain, int arity,
                                   const std::function<std::string(const Tuple&)>& f);

    int arity() const { return arity_; }
    const std::vector<std::string>& domain() const { return domain_; }
    const std::string& apply(const Tuple& args) const;
    int apply_index(const std::vector<int>& args) const;
    int index_of(const std::string& e) const;

  private:
    std::vector<std::string> domain_;
    int arity_ = 0;
    std::vector<int> table_;
};

// f applied coordinatewise to arity(f)-many tuples of R stays in R.
bool preserves_relation(const Operation& f, const Structure& b, const std::string& rel_name);
// preserves_relation over every symbol, plus a domain check.
bool is_polymorphism(const Operation& f, const Structure& b);
// arity 3 with f(x,y,y) = f(y,y,x) = x for all x,y.
bool is_maltsev(const Operation& f);

} // namespace cspb
