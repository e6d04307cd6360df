#include "cspb/structure.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace cspb {

namespace {

bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '@' ||
           c == '\'' || c == '-' || c == '.';
}

} // namespace

bool is_valid_element_name(std::string_view name) {
    if (name.empty()) return false;
    return std::all_of(name.begin(), name.end(), is_name_char);
}

Vocabulary::Vocabulary(std::vector<std::pair<std::string, int>> syms) : symbols(std::move(syms)) {
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        if (symbols[i].first.empty() || !is_valid_element_name(symbols[i].first))
            throw InputError("bad relation symbol name '" + symbols[i].first + "'");
        if (symbols[i].second < 0)
            throw InputError("negative arity for symbol '" + symbols[i].first + "'");
        for (std::size_t l = 0; l < i; ++l)
            if (symbols[l].first == symbols[i].first)
                throw InputError("duplicate relation symbol '" + symbols[i].first + "'");
    }
}

bool Vocabulary::has(std::string_view name) const {
    for (const auto& [n, a] : symbols)
        if (n == name) return true;
    return false;
}

int Vocabulary::arity(std::string_view name) const {
    for (const auto& [n, a] : symbols)
        if (n == name) return a;
    throw InputError("unknown relation symbol '" + std::string(name) + "'");
}

bool Vocabulary::same_symbols(const Vocabulary& other) const {
    return includes(other) && other.includes(*this);
}

bool Vocabulary::includes(const Vocabulary& other) const {
    for (const auto& [n, a] : other.symbols) {
        if (!has(n) || arity(n) != a) return false;
    }
    return true;
}

Vocabulary Vocabulary::merged_with(const Vocabulary& other) const {
    Vocabulary out = *this;
    for (const auto& [n, a] : other.symbols) {
        if (out.has(n)) {
            if (out.arity(n) != a)
                throw InputError("conflicting arity for symbol '" + n + "' in vocabulary merge");
        } else {
            out.symbols.emplace_back(n, a);
        }
    }
    return out;
}

Structure::Structure(Vocabulary vocab, std::vector<std::string> domain,
                     std::map<std::string, std::set<Tuple>> relations)
    : vocab_(std::move(vocab)), domain_(std::move(domain)), relations_(std::move(relations)) {
    std::sort(domain_.begin(), domain_.end());
    domain_.erase(std::unique(domain_.begin(), domain_.end()), domain_.end());
    for (const auto& e : domain_)
        if (!is_valid_element_name(e)) throw InputError("bad element name '" + e + "'");

    for (const auto& [name, tuples] : relations_) {
        if (!vocab_.has(name)) throw InputError("relation '" + name + "' not in vocabulary");
        const int ar = vocab_.arity(name);
        for (const auto& t : tuples) {
            if (static_cast<int>(t.size()) != ar)
                throw InputError("tuple of arity " + std::to_string(t.size()) + " in relation '" +
                                 name + "/" + std::to_string(ar) + "'");
            for (const auto& e : t)
                if (!has_element(e))
                    throw InputError("tuple element '" + e + "' outside the domain");
        }
    }
    // Every declared symbol gets an interpretation, possibly empty.
    for (const auto& [name, ar] : vocab_.symbols)
        relations_.try_emplace(name);
}

const std::set<Tuple>& Structure::relation(std::string_view name) const {
    auto it = relations_.find(std::string(name));
    if (it == relations_.end()) throw InputError("unknown relation symbol '" + std::string(name) + "'");
    return it->second;
}

bool Structure::has_element(const std::string& e) const {
    return std::binary_search(domain_.begin(), domain_.end(), e);
}

std::size_t Structure::tuple_count() const {
    std::size_t n = 0;
    for (const auto& [name, tuples] : relations_) n += tuples.size();
    return n;
}

std::set<std::pair<std::string, Tuple>> Structure::tuple_view() const {
    std::set<std::pair<std::string, Tuple>> out;
    for (const auto& [name, tuples] : relations_)
        for (const auto& t : tuples) out.emplace(name, t);
    return out;
}

Structure Structure::induced(const std::set<std::string>& keep) const {
    for (const auto& e : keep)
        if (!has_element(e)) throw InputError("induced(): element '" + e + "' not in domain");
    std::map<std::string, std::set<Tuple>> rels;
    for (const auto& [name, tuples] : relations_) {
        for (const auto& t : tuples) {
            bool inside = std::all_of(t.begin(), t.end(),
                                      [&](const std::string& e) { return keep.count(e) > 0; });
            if (inside) rels[name].insert(t);
        }
    }
    return Structure(vocab_, std::vector<std::string>(keep.begin(), keep.end()), std::move(rels));
}

Structure Structure::renamed(const std::map<std::string, std::string>& rename) const {
    auto img = [&](const std::string& e) -> const std::string& {
        auto it = rename.find(e);
        if (it == rename.end()) throw InputError("renamed(): no image for element '" + e + "'");
        return it->second;
    };
    std::vector<std::string> dom;
    dom.reserve(domain_.size());
    for (const auto& e : domain_) dom.push_back(img(e));
    std::map<std::string, std::set<Tuple>> rels;
    for (const auto& [name, tuples] : relations_) {
        auto& out = rels[name];
        for (const auto& t : tuples) {
            Tuple nt;
            nt.reserve(t.size());
            for (const auto& e : t) nt.push_back(img(e));
            out.insert(std::move(nt));
        }
    }
    return Structure(vocab_, std::move(dom), std::move(rels));
}

bool Structure::operator<(const Structure& other) const {
    if (domain_ != other.domain_) return domain_ < other.domain_;
    return relations_ < other.relations_;
}

Structure union_structures(const Structure& a, const Structure& b) {
    Vocabulary vocab = a.vocab().merged_with(b.vocab());
    std::vector<std::string> dom = a.domain();
    dom.insert(dom.end(), b.domain().begin(), b.domain().end());
    std::map<std::string, std::set<Tuple>> rels = a.relations();
    for (const auto& [name, tuples] : b.relations()) rels[name].insert(tuples.begin(), tuples.end());
    return Structure(std::move(vocab), std::move(dom), std::move(rels));
}

Structure union_structures(const std::vector<Structure>& parts) {
    if (parts.empty()) throw InputError("union_structures(): empty list");
    Structure acc = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) acc = union_structures(acc, parts[i]);
    return acc;
}

bool verify_homomorphism(const Structure& source, const Structure& target,
                         const std::map<std::string, std::string>& map,
                         std::vector<std::string>* diagnostics) {
    bool ok = true;
    auto report = [&](const std::string& msg) {
        ok = false;
        if (diagnostics) diagnostics->push_back(msg);
    };
    for (const auto& e : source.domain()) {
        auto it = map.find(e);
        if (it == map.end()) {
            report("no image for element '" + e + "'");
            continue;
        }
        if (!target.has_element(it->second))
            report("image '" + it->second + "' of '" + e + "' outside target domain");
    }
    if (!ok) return false;
    for (const auto& [name, tuples] : source.relations()) {
        if (!target.vocab().has(name)) {
            report("target lacks relation symbol '" + name + "'");
            continue;
        }
        const auto& tgt = target.relation(name);
        for (const auto& t : tuples) {
            Tuple image;
            image.reserve(t.size());
            for (const auto& e : t) image.push_back(map.at(e));
            if (!tgt.count(image)) {
                std::string s = name + "(";
                for (std::size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + t[i];
                report("tuple " + s + ") not preserved");
            }
        }
    }
    return ok;
}

bool verify_homomorphism(const Homomorphism& h, std::vector<std::string>* diagnostics) {
    return verify_homomorphism(h.source, h.target, h.map, diagnostics);
}

namespace {

struct Cursor {
    const std::string& text;
    std::size_t pos = 0;
    int line = 1;
    int col = 1;

    bool done() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }
    void advance() {
        if (text[pos] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++pos;
    }
    void skip_ws_and_comments(bool stop_at_newline = false) {
        while (!done()) {
            char c = peek();
            if (c == '#') {
                while (!done() && peek() != '\n') advance();
            } else if (c == '\n' && stop_at_newline) {
                return;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                return;
            }
        }
    }
    std::string word() {
        std::size_t start = pos;
        while (!done() && is_name_char(peek())) advance();
        return text.substr(start, pos - start);
    }
};

} // namespace

Structure parse_structure(const std::string& text) {
    Cursor cur{text};
    std::vector<std::string> domain;
    bool saw_domain = false;
    std::vector<std::pair<std::string, int>> symbols;
    std::map<std::string, std::set<Tuple>> rels;

    cur.skip_ws_and_comments();
    while (!cur.done()) {
        int at_line = cur.line, at_col = cur.col;
        std::string head = cur.word();
        if (head.empty()) throw ParseError("expected identifier", cur.line, cur.col);
        if (head == "domain") {
            if (cur.done() || cur.peek() != ':')
                throw ParseError("expected ':' after 'domain'", cur.line, cur.col);
            cur.advance();
            if (saw_domain) throw ParseError("duplicate domain line", at_line, at_col);
            saw_domain = true;
            // Elements up to end of line.
            while (true) {
                cur.skip_ws_and_comments(/*stop_at_newline=*/true);
                if (cur.done() || cur.peek() == '\n') break;
                std::string e = cur.word();
                if (e.empty()) throw ParseError("bad element name", cur.line, cur.col);
                domain.push_back(e);
            }
        } else {
            // Relation line: name/arity: (a,b) (c,d)
            if (cur.done() || cur.peek() != '/')
                throw ParseError("expected '/' after relation name", cur.line, cur.col);
            cur.advance();
            std::string ar = cur.word();
            if (ar.empty() || !std::all_of(ar.begin(), ar.end(), [](char c) {
                    return std::isdigit(static_cast<unsigned char>(c));
                }))
                throw ParseError("expected arity after '/'", cur.line, cur.col);
            int arity = std::stoi(ar);
            if (cur.done() || cur.peek() != ':')
                throw ParseError("expected ':' after arity", cur.line, cur.col);
            cur.advance();
            for (const auto& [n, a] : symbols)
                if (n == head) throw ParseError("duplicate relation line for '" + head + "'", at_line, at_col);
            symbols.emplace_back(head, arity);
            auto& tuples = rels[head];
            while (true) {
                cur.skip_ws_and_comments(/*stop_at_newline=*/true);
                if (cur.done() || cur.peek() == '\n') break;
                if (cur.peek() != '(')
                    throw ParseError("expected '(' to open a tuple", cur.line, cur.col);
                cur.advance();
                Tuple t;
                if (arity == 0) {
                    cur.skip_ws_and_comments(true);
                    if (cur.done() || cur.peek() != ')')
                        throw ParseError("expected ')' in 0-ary tuple", cur.line, cur.col);
                    cur.advance();
                } else {
                    for (int i = 0; i < arity; ++i) {
                        cur.skip_ws_and_comments(true);
                        std::string e = cur.word();
                        if (e.empty()) throw ParseError("bad tuple element", cur.line, cur.col);
                        t.push_back(e);
                        cur.skip_ws_and_comments(true);
                        if (i + 1 < arity) {
                            if (cur.done() || cur.peek() != ',')
                                throw ParseError("expected ',' in tuple", cur.line, cur.col);
                            cur.advance();
                        }
                    }
                    if (cur.done() || cur.peek() != ')')
                        throw ParseError("expected ')' to close tuple", cur.line, cur.col);
                    cur.advance();
                }
                tuples.insert(std::move(t));
            }
        }
        cur.skip_ws_and_comments();
    }
    if (!saw_domain) throw ParseError("missing domain line", cur.line, cur.col);
    try {
        return Structure(Vocabulary(std::move(symbols)), std::move(domain), std::move(rels));
    } catch (const InputError& e) {
        throw ParseError(e.what(), 1, 1);
    }
}

std::string print_structure(const Structure& s) {
    std::ostringstream out;
    out << "domain:";
    for (const auto& e : s.domain()) out << ' ' << e;
    out << '\n';
    for (const auto& [name, arity] : s.vocab().symbols) {
        out << name << '/' << arity << ':';
        for (const auto& t : s.relation(name)) {
            out << " (";
            for (std::size_t i = 0; i < t.size(); ++i) out << (i ? "," : "") << t[i];
            out << ')';
        }
        out << '\n';
    }
    return out.str();
}

} // namespace cspb
