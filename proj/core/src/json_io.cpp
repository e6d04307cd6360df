#include "cspb/json_io.hpp"

#include "cspb/errors.hpp"

namespace cspb {

Json envelope(const std::string& kind) {
    Json doc;
    doc["format"] = 1;
    doc["kind"] = kind;
    return doc;
}

void check_envelope(const Json& doc, const std::string& kind) {
    if (!doc.is_object() || doc.value("format", 0) != 1)
        throw InputError("expected a format-1 document");
    if (doc.value("kind", std::string()) != kind)
        throw InputError("expected a '" + kind + "' document, got '" +
                         doc.value("kind", std::string("<none>")) + "'");
}

Json derivation_to_json(const Derivation& d) {
    Json doc = envelope("derivation");
    Json steps = Json::array();
    for (const DerivationStep& s : d.steps) {
        Json step;
        step["rule"] = s.rule;
        step["assignment"] = s.assignment;
        steps.push_back(std::move(step));
    }
    doc["steps"] = std::move(steps);
    return doc;
}

Derivation derivation_from_json(const Json& doc) {
    check_envelope(doc, "derivation");
    if (!doc.contains("steps") || !doc["steps"].is_array())
        throw InputError("derivation document lacks a steps array");
    Derivation d;
    for (const Json& step : doc["steps"]) {
        DerivationStep out;
        if (!step.contains("rule") || !step["rule"].is_number_integer())
            throw InputError("derivation step lacks a rule index");
        out.rule = step["rule"].get<int>();
        if (step.contains("assignment")) {
            if (!step["assignment"].is_object())
                throw InputError("derivation step assignment must be an object");
            for (const auto& [var, val] : step["assignment"].items()) {
                if (!val.is_string()) throw InputError("assignment values must be strings");
                out.assignment[var] = val.get<std::string>();
            }
        }
        d.steps.push_back(std::move(out));
    }
    return d;
}

Json mnbp_to_json(const Mnbp& h) {
    Json doc = envelope("mnbp");
    doc["n"] = h.n;
    Json vocab = Json::array();
    for (const auto& [name, arity] : h.vocab.symbols) vocab.push_back({{"name", name}, {"arity", arity}});
    doc["vocab"] = std::move(vocab);
    doc["nodes"] = h.node_names;
    doc["s"] = h.source();
    doc["t"] = h.sink();
    doc["idb_states"] = h.idb_states;
    doc["state_bound"] = h.state_bound;
    Json arcs = Json::array();
    for (const MnbpArc& a : h.arcs) {
        Json arc;
        arc["from"] = a.from;
        arc["to"] = a.to;
        if (a.label) arc["label"] = {{"rel", a.label->rel}, {"tuple", a.label->tuple}};
        arcs.push_back(std::move(arc));
    }
    doc["arcs"] = std::move(arcs);
    return doc;
}

Mnbp mnbp_from_json(const Json& doc) {
    check_envelope(doc, "mnbp");
    Mnbp h;
    if (!doc.contains("n") || !doc["n"].is_number_integer())
        throw InputError("mnbp document lacks n");
    h.n = doc["n"].get<int>();
    std::vector<std::pair<std::string, int>> syms;
    for (const Json& entry : doc.value("vocab", Json::array())) {
        if (!entry.contains("name") || !entry.contains("arity"))
            throw InputError("mnbp vocab entries need name and arity");
        syms.emplace_back(entry["name"].get<std::string>(), entry["arity"].get<int>());
    }
    h.vocab = Vocabulary(std::move(syms));
    h.node_names = doc.value("nodes", std::vector<std::string>());
    if (h.node_names.size() < 2) throw InputError("mnbp needs at least source and sink nodes");
    if (doc.value("s", 0) != 0 || doc.value("t", 1) != 1)
        throw InputError("mnbp documents must use node 0 as source and node 1 as sink");
    h.idb_states = doc.value("idb_states", 0);
    h.state_bound = doc.value("state_bound", 0);
    for (const Json& arc : doc.value("arcs", Json::array())) {
        MnbpArc out;
        out.from = arc.value("from", -1);
        out.to = arc.value("to", -1);
        if (out.from < 0 || out.from >= h.size() || out.to < 0 || out.to >= h.size())
            throw InputError("mnbp arc endpoint out of range");
        if (arc.contains("label")) {
            MnbpLabel label;
            label.rel = arc["label"].value("rel", std::string());
            label.tuple = arc["label"].value("tuple", Tuple());
            if (!h.vocab.has(label.rel) ||
                h.vocab.arity(label.rel) != static_cast<int>(label.tuple.size()))
                throw InputError("mnbp arc label does not fit the vocabulary");
            out.label = std::move(label);
        }
        h.arcs.push_back(std::move(out));
    }
    return h;
}

Json zigzag_to_json(const ZigzagResult& z) {
    Json doc = envelope("zigzag");
    doc["j"] = z.j;
    doc["k"] = z.k;
    doc["pair_levels"] = z.pair_levels;
    Json bags = Json::array();
    for (const Structure& b : z.bags) bags.push_back(print_structure(b));
    doc["bags"] = std::move(bags);
    Json isos = Json::array();
    for (const auto& iso : z.isos) isos.push_back(iso);
    doc["isos"] = std::move(isos);
    return doc;
}

Json canonical_signature_to_json(const CanonicalProgram& cp) {
    Json doc = envelope("canonical-signature");
    doc["j"] = cp.j;
    doc["k"] = cp.k;
    doc["mode"] = to_string(cp.mode);
    doc["goal"] = cp.base.goal;
    Json idbs = Json::array();
    for (const auto& [name, tuples] : cp.subscript_index) {
        Json entry;
        entry["name"] = name;
        Json ts = Json::array();
        for (const Tuple& t : tuples) ts.push_back(t);
        entry["tuples"] = std::move(ts);
        idbs.push_back(std::move(entry));
    }
    doc["idbs"] = std::move(idbs);
    return doc;
}

} // namespace cspb
