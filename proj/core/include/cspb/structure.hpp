#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cspb/errors.hpp"

namespace cspb {

using Tuple = std::vector<std::string>;

// A relational signature: named symbols with fixed arities, in declaration
// order. Arity 0 is allowed.
struct Vocabulary {
    std::vector<std::pair<std::string, int>> symbols;

    Vocabulary() = default;
    explicit Vocabulary(std::vector<std::pair<std::string, int>> syms);

    bool has(std::string_view name) const;
    int arity(std::string_view name) const; // throws InputError on unknown symbol

    // Symbol-set equality (declaration order is presentation only).
    bool same_symbols(const Vocabulary& other) const;
    // True if every symbol of `other` is present here with the same arity.
    bool includes(const Vocabulary& other) const;

    Vocabulary merged_with(const Vocabulary& other) const;

    bool operator==(const Vocabulary&) const = default;
};

// A finite relational structure. Element identifiers are opaque strings and
// the domain is kept sorted; all determinism downstream leans on that order.
// Instances are immutable after construction.
class Structure {
  public:
    Structure() = default;
    Structure(Vocabulary vocab, std::vector<std::string> domain,
              std::map<std::string, std::set<Tuple>> relations);

    const Vocabulary& vocab() const { return vocab_; }
    const std::vector<std::string>& domain() const { return domain_; }
    const std::map<std::string, std::set<Tuple>>& relations() const { return relations_; }
    const std::set<Tuple>& relation(std::string_view name) const;

    bool has_element(const std::string& e) const;
    std::size_t tuple_count() const;

    // The same data as a flat set of (symbol, tuple) pairs.
    std::set<std::pair<std::string, Tuple>> tuple_view() const;

    // Induced substructure on `keep` (must be a subset of the domain).
    Structure induced(const std::set<std::string>& keep) const;

    // Apply an element renaming. `rename` must be defined on the whole
    // domain; the image may identify elements (relations are unioned).
    Structure renamed(const std::map<std::string, std::string>& rename) const;

    bool operator==(const Structure&) const = default;
    bool operator<(const Structure& other) const;

  private:
    Vocabulary vocab_;
    std::vector<std::string> domain_;
    std::map<std::string, std::set<Tuple>> relations_;
};

// Union of structures over mergeable vocabularies: domains and relations
// union elementwise.
Structure union_structures(const Structure& a, const Structure& b);
Structure union_structures(const std::vector<Structure>& parts);

struct Homomorphism {
    Structure source;
    Structure target;
    std::map<std::string, std::string> map;
};

// Containment check: map is total on source.domain, lands in target.domain,
// and f(R^source) is contained in R^target for every symbol.
bool verify_homomorphism(const Structure& source, const Structure& target,
                         const std::map<std::string, std::string>& map,
                         std::vector<std::string>* diagnostics = nullptr);
bool verify_homomorphism(const Homomorphism& h, std::vector<std::string>* diagnostics = nullptr);

// Text format:
//   # comment
//   domain: a b c d
//   E/2: (a,b) (b,c)
//   S/1: (a)
// Declared-but-empty relations are legal. print_structure emits the
// canonical form (sorted domain, tuples in sorted order); parse/print
// round-trips bit-exactly on canonical text.
Structure parse_structure(const std::string& text);
std::string print_structure(const Structure& s);

bool is_valid_element_name(std::string_view name);

} // namespace cspb
