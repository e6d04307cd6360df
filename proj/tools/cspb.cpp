#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "cspb/canonical.hpp"
#include "cspb/datalog.hpp"
#include "cspb/errors.hpp"
#include "cspb/hom_search.hpp"
#include "cspb/json_io.hpp"
#include "cspb/path_classify.hpp"
#include "cspb/pathscape.hpp"
#include "cspb/structure.hpp"
#include "cspb/succ_ro.hpp"

namespace {

using cspb::Json;

std::string slurp(const std::string& path) {
    if (path == "-") {
        std::ostringstream buf;
        buf << std::cin.rdbuf();
        return buf.str();
    }
    std::ifstream in(path);
    if (!in) throw cspb::InputError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

cspb::Structure load_structure(const std::string& path) {
    return cspb::parse_structure(slurp(path));
}

cspb::DatalogProgram load_program(const std::string& path) {
    return cspb::parse_program(slurp(path));
}

Json load_json(const std::string& path) {
    return Json::parse(slurp(path));
}

struct Output {
    bool json = false;
    bool seed_set = false;
    unsigned seed = 0;

    void emit(Json doc, const std::string& text) const {
        if (json) {
            if (seed_set) doc["seed"] = seed;
            std::cout << doc.dump(2) << '\n';
        } else if (!text.empty()) {
            std::cout << text;
            if (text.back() != '\n') std::cout << '\n';
        }
    }
};

std::string join_derivation(const cspb::DatalogProgram& p, const cspb::Derivation& d) {
    std::ostringstream out;
    for (std::size_t i = 0; i < d.steps.size(); ++i) {
        const auto& step = d.steps[i];
        out << i << ": rule " << step.rule << "  ";
        const auto& rule = p.rules[step.rule];
        out << rule.head.pred;
        if (!rule.head.vars.empty()) {
            out << '(';
            for (std::size_t v = 0; v < rule.head.vars.size(); ++v) {
                if (v) out << ',';
                out << step.assignment.at(rule.head.vars[v]);
            }
            out << ')';
        }
        out << "  {";
        bool first = true;
        for (const auto& [var, val] : step.assignment) {
            if (!first) out << ", ";
            first = false;
            out << var << "=" << val;
        }
        out << "}\n";
    }
    return out.str();
}

Json structure_json(const cspb::Structure& s) {
    return Json(cspb::print_structure(s));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"workbench for relational structures, Datalog fragments, oriented paths,\n"
                 "path representations, and monotone branching programs"};
    app.require_subcommand(1);

    Output out;
    app.add_flag("--json", out.json, "emit one machine-readable JSON document");
    app.add_option("--seed", out.seed, "seed echoed into machine output for reproducibility")
        ->each([&out](const std::string&) { out.seed_set = true; });

    int rc = 0;

    // hom A B
    {
        auto* sub = app.add_subcommand("hom", "search for a homomorphism between two structures");
        auto a = std::make_shared<std::string>();
        auto b = std::make_shared<std::string>();
        auto all = std::make_shared<bool>(false);
        auto max_nodes = std::make_shared<std::int64_t>(1'000'000);
        sub->add_option("source", *a, "source structure file")->required();
        sub->add_option("target", *b, "target structure file")->required();
        sub->add_flag("--all", *all, "enumerate every homomorphism");
        sub->add_option("--max-nodes", *max_nodes, "search node budget");
        sub->callback([&, a, b, all, max_nodes] {
            cspb::Structure sa = load_structure(*a);
            cspb::Structure sb = load_structure(*b);
            cspb::SearchLimits limits;
            limits.max_nodes = *max_nodes;
            Json doc = cspb::envelope("hom");
            if (*all) {
                auto homs = cspb::all_homomorphisms(sa, sb, limits);
                doc["count"] = homs.size();
                doc["maps"] = homs;
                std::ostringstream text;
                text << homs.size() << " homomorphism(s)\n";
                for (const auto& h : homs) {
                    for (const auto& [k, v] : h) text << "  " << k << " -> " << v << '\n';
                    text << '\n';
                }
                rc = homs.empty() ? 1 : 0;
                doc["found"] = !homs.empty();
                out.emit(doc, text.str());
                return;
            }
            auto h = cspb::find_homomorphism(sa, sb, limits);
            doc["found"] = h.has_value();
            if (h) {
                doc["map"] = h->map;
                std::ostringstream text;
                for (const auto& [k, v] : h->map) text << k << " -> " << v << '\n';
                out.emit(doc, text.str());
                rc = 0;
            } else {
                out.emit(doc, "no homomorphism\n");
                rc = 1;
            }
        });
    }

    // eval P A
    {
        auto* sub = app.add_subcommand("eval", "run a Datalog program on a structure");
        auto pf = std::make_shared<std::string>();
        auto af = std::make_shared<std::string>();
        auto trace = std::make_shared<bool>(false);
        sub->add_option("program", *pf, "program file")->required();
        sub->add_option("input", *af, "input structure file")->required();
        sub->add_flag("--trace", *trace, "print the accepting derivation");
        sub->callback([&, pf, af, trace] {
            auto p = load_program(*pf);
            auto a = load_structure(*af);
            auto res = cspb::evaluate(p, a);
            Json doc = cspb::envelope("eval");
            doc["accepted"] = res.accepted;
            doc["derived_facts"] = res.derived_facts;
            doc["rounds"] = res.rounds;
            std::ostringstream text;
            text << (res.accepted ? "accepted" : "rejected") << " (" << res.derived_facts
                 << " facts, " << res.rounds << " rounds)\n";
            if (res.witness) {
                doc["witness"] = cspb::derivation_to_json(*res.witness);
                if (*trace) text << join_derivation(p, *res.witness);
            }
            out.emit(doc, text.str());
            rc = res.accepted ? 0 : 1;
        });
    }

    // canon B j k [--accept A]
    {
        auto* sub = app.add_subcommand("canon", "build or run the canonical program of a template");
        auto bf = std::make_shared<std::string>();
        auto j = std::make_shared<int>(1);
        auto k = std::make_shared<int>(2);
        auto mode_name = std::make_shared<std::string>("linear");
        auto accept = std::make_shared<std::string>();
        sub->add_option("template", *bf, "template structure file")->required();
        sub->add_option("j", *j, "IDB width")->required();
        sub->add_option("k", *k, "rule width")->required();
        sub->add_option("--mode", *mode_name, "linear or symmetric")
            ->check(CLI::IsMember({"linear", "symmetric"}));
        sub->add_option("--accept", *accept, "decide acceptance of this structure lazily");
        sub->callback([&, bf, j, k, mode_name, accept] {
            auto b = load_structure(*bf);
            auto mode = *mode_name == "linear" ? cspb::CanonicalMode::linear
                                               : cspb::CanonicalMode::symmetric;
            if (accept->empty()) {
                auto cp = cspb::build_canonical(b, *j, *k, mode);
                Json doc = cspb::envelope("canon");
                doc["program"] = cspb::print_program(cp.base);
                doc["signature"] = cspb::canonical_signature_to_json(cp);
                doc["rules"] = cp.base.rules.size();
                out.emit(doc, cspb::print_program(cp.base));
                rc = 0;
                return;
            }
            auto a = load_structure(*accept);
            auto res = cspb::canonical_accept(b, *j, *k, mode, a);
            Json doc = cspb::envelope("canon");
            doc["accepted"] = res.accepted;
            doc["states_marked"] = res.states_marked;
            std::ostringstream text;
            text << (res.accepted ? "accepted" : "rejected") << " (" << res.states_marked
                 << " states)\n";
            if (res.witness) {
                doc["witness"] = cspb::derivation_to_json(*res.witness);
                doc["witness_program"] = cspb::print_program(res.witness_program.base);
                doc["signature"] = cspb::canonical_signature_to_json(res.witness_program);
                text << join_derivation(res.witness_program.base, *res.witness);
            }
            out.emit(doc, text.str());
            rc = res.accepted ? 0 : 1;
        });
    }

    // zigzag REP WORD
    {
        auto* sub = app.add_subcommand("zigzag", "modulate a path representation along an oriented path");
        auto repf = std::make_shared<std::string>();
        auto word = std::make_shared<std::string>();
        sub->add_option("representation", *repf, "representation file")->required();
        sub->add_option("word", *word, "oriented path word over F/B")->required();
        sub->callback([&, repf, word] {
            auto rep = cspb::parse_representation(slurp(*repf));
            cspb::OrientedPath p(*word);
            auto z = cspb::zigzag(rep, p);
            auto proj = cspb::projection_hom(z, rep);
            Json doc = cspb::zigzag_to_json(z);
            auto out_rep = z.as_representation();
            doc["representation"] = cspb::print_representation(out_rep);
            doc["projection"] = proj.map;
            out.emit(doc, cspb::print_representation(out_rep));
            rc = 0;
        });
    }

    // pathdec A j k
    {
        auto* sub = app.add_subcommand("pathdec", "search for a path representation of bounded width");
        auto af = std::make_shared<std::string>();
        auto j = std::make_shared<int>(1);
        auto k = std::make_shared<int>(2);
        auto max_nodes = std::make_shared<std::int64_t>(2'000'000);
        sub->add_option("input", *af, "structure file")->required();
        sub->add_option("j", *j, "adjacent overlap bound")->required();
        sub->add_option("k", *k, "bag size bound")->required();
        sub->add_option("--max-nodes", *max_nodes, "search node budget");
        sub->callback([&, af, j, k, max_nodes] {
            auto a = load_structure(*af);
            cspb::PathwidthLimits limits;
            limits.max_nodes = *max_nodes;
            auto rep = cspb::decide_pathwidth(a, *j, *k, limits);
            Json doc = cspb::envelope("pathdec");
            doc["found"] = rep.has_value();
            if (rep) {
                doc["representation"] = cspb::print_representation(*rep);
                doc["bags"] = rep->bags.size();
                out.emit(doc, cspb::print_representation(*rep));
                rc = 0;
            } else {
                out.emit(doc, "no representation within the given width\n");
                rc = 1;
            }
        });
    }

    // classify-path WORD
    {
        auto* sub = app.add_subcommand("classify-path", "report the shape of an oriented path word");
        auto word = std::make_shared<std::string>();
        sub->add_option("word", *word, "oriented path word over F/B")->required();
        sub->callback([&, word] {
            cspb::OrientedPath p(*word);
            auto shape = cspb::classify_path_shape(p);
            Json doc = cspb::envelope("classify-path");
            doc["word"] = p.word;
            doc["kind"] = cspb::to_string(shape.kind);
            doc["mirrored"] = shape.mirrored;
            doc["minimal"] = p.minimal;
            doc["height"] = p.height;
            doc["levels"] = p.levels;
            std::ostringstream text;
            text << "kind: " << cspb::to_string(shape.kind);
            if (shape.mirrored) text << " (mirrored)";
            text << "\nminimal: " << (p.minimal ? "true" : "false") << "\nheight: " << p.height
                 << '\n';
            if (shape.kind == cspb::PathShape::Kind::wave) {
                doc["r"] = shape.wave_r;
                doc["ell"] = shape.wave_ell;
                text << "r: " << shape.wave_r << "\nell: " << shape.wave_ell << '\n';
            }
            if (shape.kind == cspb::PathShape::Kind::staircase) {
                Json segs = Json::array();
                for (const auto& seg : shape.segments) {
                    if (seg.is_wave)
                        segs.push_back({{"wave", true}, {"ell", seg.ell}, {"r", seg.r}});
                    else
                        segs.push_back({{"wave", false}, {"len", seg.len}});
                }
                doc["segments"] = std::move(segs);
                text << "segments: " << shape.segments.size() << '\n';
            }
            out.emit(doc, text.str());
            rc = 0;
        });
    }

    // nl-witness WORD
    {
        auto* sub = app.add_subcommand("nl-witness", "search for a three-way split with a separating path");
        auto word = std::make_shared<std::string>();
        auto max_len = std::make_shared<int>(12);
        sub->add_option("word", *word, "core oriented path word")->required();
        sub->add_option("--max-len", *max_len, "separating word length budget");
        sub->callback([&, word, max_len] {
            cspb::OrientedPath b(*word);
            cspb::NlSearchLimits limits;
            limits.max_q_len = *max_len;
            auto w = cspb::nl_witness_search(b, limits);
            Json doc = cspb::envelope("nl-witness");
            doc["found"] = w.has_value();
            if (w) {
                doc["band_start"] = w->band_start;
                doc["split_start"] = w->split_start;
                doc["split_end"] = w->split_end;
                doc["band_end"] = w->band_end;
                doc["flipped"] = w->flipped;
                doc["height"] = w->h;
                doc["q"] = w->q.word;
                doc["hom_to_p1"] = w->hom_to_p1;
                doc["hom_to_p3"] = w->hom_to_p3;
                std::ostringstream text;
                text << "band: [" << w->band_start << ", " << w->split_start << ", "
                     << w->split_end << ", " << w->band_end << ")  height " << w->h
                     << (w->flipped ? "  (on the mirrored word)" : "") << "\nq: " << w->q.word
                     << '\n';
                out.emit(doc, text.str());
                rc = 0;
            } else {
                out.emit(doc, "no witness split found\n");
                rc = 1;
            }
        });
    }

    // gadget WORD
    {
        auto* sub = app.add_subcommand("gadget", "assemble and verify the order gadget of a witness split");
        auto word = std::make_shared<std::string>();
        auto max_len = std::make_shared<int>(12);
        sub->add_option("word", *word, "core oriented path word")->required();
        sub->add_option("--max-len", *max_len, "separating word length budget");
        sub->callback([&, word, max_len] {
            cspb::OrientedPath b(*word);
            cspb::NlSearchLimits limits;
            limits.max_q_len = *max_len;
            auto w = cspb::nl_witness_search(b, limits);
            if (!w) {
                out.emit(cspb::envelope("gadget"), "no witness split found\n");
                rc = 1;
                return;
            }
            auto g = cspb::build_leq_gadget(b, *w);
            Json doc = cspb::envelope("gadget");
            doc["structure"] = structure_json(g.g);
            doc["x"] = g.x;
            doc["y"] = g.y;
            doc["zero"] = g.zero_vertex;
            doc["one"] = g.one_vertex;
            doc["flipped"] = w->flipped;
            doc["verified"] = g.verified;
            Json proj = Json::array();
            for (const auto& [u, v] : g.projection) proj.push_back({u, v});
            doc["projection"] = std::move(proj);
            std::ostringstream text;
            text << cspb::print_structure(g.g) << "x: " << g.x << "\ny: " << g.y
                 << "\nverified: " << (g.verified ? "true" : "false") << '\n';
            out.emit(doc, text.str());
            rc = g.verified ? 0 : 1;
        });
    }

    // obstructions WORD
    {
        auto* sub = app.add_subcommand("obstructions", "generate the low obstructions of a wave");
        auto word = std::make_shared<std::string>();
        auto max_len = std::make_shared<int>(12);
        sub->add_option("word", *word, "wave word written bottom-up")->required();
        sub->add_option("--max-len", *max_len, "emission length budget");
        sub->callback([&, word, max_len] {
            cspb::OrientedPath q(*word);
            auto obs = cspb::wave_obstructions(q, *max_len);
            Json doc = cspb::envelope("obstructions");
            doc["h"] = obs.h;
            doc["height_bound"] = obs.h + 2;
            Json words = Json::array();
            std::ostringstream text;
            text << "anything of height above " << obs.h + 2 << ", plus:\n";
            for (const auto& p : obs.paths) {
                words.push_back(p.word);
                text << p.word << '\n';
            }
            doc["paths"] = std::move(words);
            out.emit(doc, text.str());
            rc = 0;
        });
    }

    // split A ELEM [--pick 0,2]
    {
        auto* sub = app.add_subcommand("split", "list or rewrite the occurrences of an element");
        auto af = std::make_shared<std::string>();
        auto elem = std::make_shared<std::string>();
        auto pick = std::make_shared<std::string>();
        sub->add_option("input", *af, "structure file")->required();
        sub->add_option("element", *elem, "element to split")->required();
        sub->add_option("--pick", *pick, "comma-separated occurrence indices to rewrite");
        sub->callback([&, af, elem, pick] {
            auto a = load_structure(*af);
            auto occ = cspb::occurrence_set(a, *elem);
            if (pick->empty()) {
                Json doc = cspb::envelope("occurrences");
                Json list = Json::array();
                std::ostringstream text;
                for (std::size_t i = 0; i < occ.size(); ++i) {
                    list.push_back(
                        {{"rel", occ[i].rel}, {"tuple", occ[i].tuple}, {"pos", occ[i].pos}});
                    text << i << ": " << occ[i].rel << "(";
                    for (std::size_t v = 0; v < occ[i].tuple.size(); ++v) {
                        if (v) text << ',';
                        text << occ[i].tuple[v];
                    }
                    text << ") at position " << occ[i].pos << '\n';
                }
                doc["occurrences"] = std::move(list);
                out.emit(doc, text.str());
                rc = 0;
                return;
            }
            std::vector<cspb::Occurrence> chosen;
            std::stringstream ss(*pick);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                std::size_t idx = std::stoul(tok);
                if (idx >= occ.size()) throw cspb::InputError("occurrence index out of range");
                chosen.push_back(occ[idx]);
            }
            auto result = cspb::split_structure(a, *elem, chosen);
            bool back = cspb::find_homomorphism(result, a).has_value();
            Json doc = cspb::envelope("split");
            doc["structure"] = structure_json(result);
            doc["maps_back"] = back;
            out.emit(doc, cspb::print_structure(result));
            rc = back ? 0 : 1;
        });
    }

    // minimize A B
    {
        auto* sub = app.add_subcommand(
            "minimize", "shrink a structure inside the class of non-maps into a template");
        auto af = std::make_shared<std::string>();
        auto bf = std::make_shared<std::string>();
        sub->add_option("input", *af, "structure file, must not map into the template")->required();
        sub->add_option("template", *bf, "template structure file")->required();
        sub->callback([&, af, bf] {
            auto a = load_structure(*af);
            auto b = load_structure(*bf);
            auto member = [&](const cspb::Structure& s) { return !cspb::homomorphic(s, b); };
            auto result = cspb::minimize_in_class(a, member);
            Json doc = cspb::envelope("minimize");
            doc["structure"] = structure_json(result);
            doc["domain"] = result.domain().size();
            doc["tuples"] = result.tuple_count();
            out.emit(doc, cspb::print_structure(result));
            rc = 0;
        });
    }

    // compile-mnbp P n
    {
        auto* sub = app.add_subcommand("compile-mnbp", "ground a linear program into a branching program");
        auto pf = std::make_shared<std::string>();
        auto n = std::make_shared<int>(2);
        sub->add_option("program", *pf, "linear program file")->required();
        sub->add_option("n", *n, "input size")->required();
        sub->callback([&, pf, n] {
            auto p = load_program(*pf);
            auto h = cspb::compile_to_mnbp(p, *n);
            Json doc = cspb::mnbp_to_json(h);
            std::ostringstream text;
            text << h.size() << " nodes (" << h.idb_states << " states, bound " << h.state_bound
                 << "), " << h.arcs.size() << " arcs; pass --json to capture the program\n";
            out.emit(doc, text.str());
            rc = 0;
        });
    }

    // eval-mnbp H A
    {
        auto* sub = app.add_subcommand("eval-mnbp", "run a branching program on a numbered structure");
        auto hf = std::make_shared<std::string>();
        auto af = std::make_shared<std::string>();
        sub->add_option("mnbp", *hf, "branching program JSON file")->required();
        sub->add_option("input", *af, "structure file with domain 1..n")->required();
        sub->callback([&, hf, af] {
            auto h = cspb::mnbp_from_json(load_json(*hf));
            auto a = cspb::SuccessorStructure::from_numbered(load_structure(*af));
            auto run = cspb::evaluate_mnbp(h, a);
            Json doc = cspb::envelope("eval-mnbp");
            doc["accepted"] = run.accepted;
            doc["read_once"] = run.read_once;
            doc["path"] = run.path;
            std::ostringstream text;
            text << (run.accepted ? "accepted" : "rejected");
            if (run.accepted)
                text << " (path of " << run.path.size() << " arcs, read-once "
                     << (run.read_once ? "true" : "false") << ")";
            text << '\n';
            out.emit(doc, text.str());
            rc = run.accepted ? 0 : 1;
        });
    }

    // surgery P M n
    {
        auto* sub = app.add_subcommand("surgery", "cut and cross-concatenate derivations of renamed copies");
        auto pf = std::make_shared<std::string>();
        auto mf = std::make_shared<std::string>();
        auto n = std::make_shared<int>(4);
        auto max_embedders = std::make_shared<int>(4096);
        sub->add_option("program", *pf, "linear program file")->required();
        sub->add_option("structure", *mf, "structure to rename and derive")->required();
        sub->add_option("n", *n, "successor domain size, a multiple of the structure size")
            ->required();
        sub->add_option("--max-embedders", *max_embedders, "renaming budget");
        sub->callback([&, pf, mf, n, max_embedders] {
            auto p = load_program(*pf);
            auto m = load_structure(*mf);
            cspb::SurgeryBudget budget;
            budget.max_embedders = *max_embedders;
            auto trace = cspb::surgery_experiment(p, m, *n, budget);
            Json doc = cspb::envelope("surgery");
            doc["found"] = trace.has_value();
            if (!trace) {
                out.emit(doc, "no splice found\n");
                rc = 1;
                return;
            }
            doc["embedder_a"] = trace->embedder_a;
            doc["embedder_b"] = trace->embedder_b;
            Json proto = Json::array();
            for (const auto& bag : trace->prototype) proto.push_back(cspb::print_structure(bag));
            doc["prototype"] = std::move(proto);
            doc["cut_bag"] = trace->cut_bag;
            doc["cut_idb"] = trace->cut_idb;
            doc["cut_tuple"] = trace->cut_tuple;
            doc["derivation_a"] = cspb::derivation_to_json(trace->derivation_a);
            doc["derivation_b"] = cspb::derivation_to_json(trace->derivation_b);
            doc["spliced"] = cspb::derivation_to_json(trace->spliced);
            doc["extracted"] = structure_json(trace->extracted);
            doc["collapse"] = trace->collapse;
            doc["spliced_valid"] = trace->spliced_valid;
            doc["split_variant"] = trace->split_variant;
            doc["splits_added"] = trace->splits_added;
            std::ostringstream text;
            text << "cut at bag " << trace->cut_bag << " on " << trace->cut_idb
                 << ", splits added " << trace->splits_added << "\n"
                 << cspb::print_structure(trace->extracted);
            out.emit(doc, text.str());
            rc = 0;
        });
    }

    // validators
    {
        auto* sub = app.add_subcommand("validate-structure", "parse and echo a structure file");
        auto af = std::make_shared<std::string>();
        sub->add_option("input", *af, "structure file")->required();
        sub->callback([&, af] {
            try {
                auto a = load_structure(*af);
                Json doc = cspb::envelope("validate-structure");
                doc["ok"] = true;
                doc["domain"] = a.domain().size();
                doc["tuples"] = a.tuple_count();
                out.emit(doc, "ok\n");
                rc = 0;
            } catch (const cspb::ParseError& e) {
                Json doc = cspb::envelope("validate-structure");
                doc["ok"] = false;
                doc["error"] = e.what();
                out.emit(doc, std::string(e.what()) + "\n");
                rc = 1;
            }
        });
    }
    {
        auto* sub = app.add_subcommand("validate-program", "parse a program and report its fragment");
        auto pf = std::make_shared<std::string>();
        sub->add_option("program", *pf, "program file")->required();
        sub->callback([&, pf] {
            try {
                auto p = load_program(*pf);
                auto fr = cspb::classify_fragment(p);
                Json doc = cspb::envelope("validate-program");
                doc["ok"] = true;
                doc["fragment"] = cspb::to_string(fr.fragment);
                doc["j"] = fr.j;
                doc["k"] = fr.k;
                std::ostringstream text;
                text << "ok: " << cspb::to_string(fr.fragment) << " width (" << fr.j << "," << fr.k
                     << ")\n";
                out.emit(doc, text.str());
                rc = 0;
            } catch (const cspb::ParseError& e) {
                Json doc = cspb::envelope("validate-program");
                doc["ok"] = false;
                doc["error"] = e.what();
                out.emit(doc, std::string(e.what()) + "\n");
                rc = 1;
            }
        });
    }
    {
        auto* sub = app.add_subcommand("validate-derivation", "check a derivation document against a program");
        auto pf = std::make_shared<std::string>();
        auto df = std::make_shared<std::string>();
        auto af = std::make_shared<std::string>();
        sub->add_option("program", *pf, "program file")->required();
        sub->add_option("derivation", *df, "derivation JSON file")->required();
        sub->add_option("--input", *af, "also check EDB facts against this structure");
        sub->callback([&, pf, df, af] {
            auto p = load_program(*pf);
            auto d = cspb::derivation_from_json(load_json(*df));
            std::optional<cspb::Structure> a;
            if (!af->empty()) a = load_structure(*af);
            auto res = cspb::validate_derivation(p, d, a ? &*a : nullptr);
            auto props = cspb::derivation_properties(p, d);
            Json doc = cspb::envelope("validate-derivation");
            doc["ok"] = res.ok;
            doc["diagnostics"] = res.diagnostics;
            doc["read_once"] = props.read_once;
            doc["free"] = props.free;
            std::ostringstream text;
            text << (res.ok ? "ok" : "invalid") << '\n';
            for (const auto& line : res.diagnostics) text << "  " << line << '\n';
            out.emit(doc, text.str());
            rc = res.ok ? 0 : 1;
        });
    }
    {
        auto* sub = app.add_subcommand("validate-rep", "check a path representation file");
        auto rf = std::make_shared<std::string>();
        sub->add_option("representation", *rf, "representation file")->required();
        sub->callback([&, rf] {
            try {
                cspb::Structure whole;
                auto rep = cspb::parse_representation(slurp(*rf), &whole);
                auto report = cspb::validate_representation(rep, &whole);
                Json doc = cspb::envelope("validate-rep");
                doc["ok"] = report.ok;
                doc["diagnostics"] = report.diagnostics;
                doc["j"] = rep.j;
                doc["k"] = rep.k;
                std::ostringstream text;
                text << (report.ok ? "ok" : "invalid") << " (" << rep.j << "," << rep.k << ")\n";
                for (const auto& line : report.diagnostics) text << "  " << line << '\n';
                out.emit(doc, text.str());
                rc = report.ok ? 0 : 1;
            } catch (const cspb::ParseError& e) {
                Json doc = cspb::envelope("validate-rep");
                doc["ok"] = false;
                doc["error"] = e.what();
                out.emit(doc, std::string(e.what()) + "\n");
                rc = 1;
            }
        });
    }
    {
        auto* sub = app.add_subcommand("validate-mnbp", "check a branching program document");
        auto hf = std::make_shared<std::string>();
        sub->add_option("mnbp", *hf, "branching program JSON file")->required();
        sub->callback([&, hf] {
            try {
                auto h = cspb::mnbp_from_json(load_json(*hf));
                Json doc = cspb::envelope("validate-mnbp");
                doc["ok"] = true;
                doc["nodes"] = h.size();
                doc["arcs"] = h.arcs.size();
                out.emit(doc, "ok\n");
                rc = 0;
            } catch (const cspb::InputError& e) {
                Json doc = cspb::envelope("validate-mnbp");
                doc["ok"] = false;
                doc["error"] = e.what();
                out.emit(doc, std::string(e.what()) + "\n");
                rc = 1;
            }
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const cspb::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const cspb::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const cspb::ResourceError& e) {
        std::cerr << "budget exhausted: " << e.what() << '\n';
        return 2;
    } catch (const Json::exception& e) {
        std::cerr << "json error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 2;
    }
    return rc;
}
