#include "explearn/experience.hpp"

#include <algorithm>

#include "explearn/json_io.hpp"

namespace explearn {
namespace {

using nlohmann::json;

struct Search {
    const std::vector<const ExperienceEdge*>& forward;
    const std::set<std::string>& required;
    PageFingerprint endpoint;
    std::vector<bool> used;
    std::vector<const ExperienceEdge*> path;

    bool covers() const {
        std::set<std::string> have;
        for (const auto* e : path) {
            have.insert(e->params_used.begin(), e->params_used.end());
        }
        return std::includes(have.begin(), have.end(), required.begin(), required.end());
    }

    // Depth-limited DFS; edges are visited in step order, so the first hit
    // at a given length is the lexicographically earliest one.
    bool dfs(PageFingerprint at, std::size_t remaining) {
        if (remaining == 0) {
            return at == endpoint && covers();
        }
        for (std::size_t i = 0; i < forward.size(); ++i) {
            if (used[i] || forward[i]->source_fp != at) {
                continue;
            }
            used[i] = true;
            path.push_back(forward[i]);
            if (dfs(forward[i]->dest_fp, remaining - 1)) {
                return true;
            }
            path.pop_back();
            used[i] = false;
        }
        return false;
    }
};

}  // namespace

ExperienceGraph::ExperienceGraph(const GuiPage& start_page) {
    start_fp_ = fingerprint_page(start_page);
    nodes_.emplace(start_fp_, serialize_page(start_page));
}

std::size_t ExperienceGraph::record_step(const GuiPage& source, const Operation& op, const GuiPage& dest,
                                         std::optional<ScoreBreakdown> score, std::optional<CheckVerdict> check,
                                         EdgeKind kind, std::set<std::string> params_used,
                                         std::optional<std::size_t> reverts) {
    ExperienceEdge edge;
    edge.source_fp = fingerprint_page(source);
    edge.dest_fp = fingerprint_page(dest);
    nodes_.emplace(edge.source_fp, serialize_page(source));
    nodes_.emplace(edge.dest_fp, serialize_page(dest));
    edge.op = op;
    edge.op_description = describe(op);
    edge.score = score;
    edge.check = check;
    edge.kind = kind;
    edge.params_used = std::move(params_used);
    edge.reverts = reverts;
    return add_edge(std::move(edge));
}

std::size_t ExperienceGraph::add_edge(ExperienceEdge edge) {
    if (edge.kind == EdgeKind::undo) {
        if (!edge.reverts || *edge.reverts >= edges_.size() || edges_[*edge.reverts].kind != EdgeKind::forward) {
            throw std::invalid_argument("undo edge must reference an earlier forward edge");
        }
    }
    edge.step_index = edges_.size() + 1;
    if (edge.op_description.empty()) {
        edge.op_description = describe(edge.op);
    }
    edges_.push_back(std::move(edge));
    return edges_.size() - 1;
}

void ExperienceGraph::add_node(PageFingerprint fp, std::string page_text) {
    nodes_.emplace(fp, std::move(page_text));
}

void ExperienceGraph::attach_check(std::size_t edge_index, CheckVerdict verdict) {
    edges_.at(edge_index).check = verdict;
}

void ExperienceGraph::set_endpoint(PageFingerprint fp) {
    endpoint_fp_ = fp;
}

std::size_t ExperienceGraph::forward_count() const {
    return static_cast<std::size_t>(std::count_if(edges_.begin(), edges_.end(),
                                                  [](const ExperienceEdge& e) { return e.kind == EdgeKind::forward; }));
}

std::size_t ExperienceGraph::undo_count() const {
    return edges_.size() - forward_count();
}

const std::string* ExperienceGraph::page_text(PageFingerprint fp) const {
    const auto it = nodes_.find(fp);
    return it == nodes_.end() ? nullptr : &it->second;
}

std::vector<ExperienceEdge> shortest_correct_path(const ExperienceGraph& graph,
                                                  const std::set<std::string>& required_params) {
    if (!graph.endpoint_fp()) {
        throw PathExtractionError("the run has no endpoint");
    }
    std::vector<const ExperienceEdge*> forward;
    for (const auto& e : graph.edges()) {
        if (e.kind == EdgeKind::forward) {
            forward.push_back(&e);
        }
    }
    Search search{forward, required_params, *graph.endpoint_fp(), std::vector<bool>(forward.size(), false), {}};
    for (std::size_t length = 1; length <= forward.size(); ++length) {
        if (search.dfs(graph.start_fp(), length)) {
            std::vector<ExperienceEdge> out;
            for (const auto* e : search.path) {
                out.push_back(*e);
            }
            return out;
        }
    }
    std::string missing;
    for (const auto& p : required_params) {
        missing += (missing.empty() ? "" : ", ") + p;
    }
    throw PathExtractionError("no forward path from start to endpoint" +
                              (missing.empty() ? std::string{} : " covering {" + missing + "}"));
}

std::vector<ExperienceEdge> erroneous_steps(const ExperienceGraph& graph,
                                            const std::vector<ExperienceEdge>& correct_path) {
    std::set<std::size_t> on_path;
    for (const auto& e : correct_path) {
        on_path.insert(e.step_index);
    }
    std::vector<ExperienceEdge> out;
    for (const auto& e : graph.edges()) {
        if (e.kind == EdgeKind::forward && !on_path.count(e.step_index)) {
            out.push_back(e);
        }
    }
    return out;
}

std::string export_graph(const ExperienceGraph& graph) {
    json nodes = json::array();
    for (const auto& [fp, text] : graph.nodes()) {
        nodes.push_back(json{{"fingerprint", fp.hex()}, {"page", text}});
    }
    json edges = json::array();
    for (const auto& e : graph.edges()) {
        json je{{"step_index", e.step_index},
                {"kind", e.kind == EdgeKind::forward ? "forward" : "undo"},
                {"source", e.source_fp.hex()},
                {"dest", e.dest_fp.hex()},
                {"operation", e.op},
                {"description", e.op_description},
                {"params_used", e.params_used}};
        if (e.score) {
            je["score"] = *e.score;
        }
        if (e.check) {
            je["check"] = *e.check;
        }
        if (e.reverts) {
            je["reverts"] = *e.reverts;
        }
        edges.push_back(std::move(je));
    }
    json j{{"format", "explearn-trace"},
           {"version", 1},
           {"start", graph.start_fp().hex()},
           {"endpoint", graph.endpoint_fp() ? json(graph.endpoint_fp()->hex()) : json(nullptr)},
           {"nodes", nodes},
           {"edges", edges}};
    return j.dump(2) + "\n";
}

ExperienceGraph import_graph(std::string_view text) {
    const auto j = json::parse(text);
    const auto fp = [](const json& v) {
        const auto parsed = PageFingerprint::from_hex(v.get<std::string>());
        if (!parsed) {
            throw std::invalid_argument("bad fingerprint '" + v.get<std::string>() + "'");
        }
        return *parsed;
    };
    ExperienceGraph g;
    g.set_start(fp(j.at("start")));
    for (const auto& n : j.at("nodes")) {
        g.add_node(fp(n.at("fingerprint")), n.at("page").get<std::string>());
    }
    for (const auto& je : j.at("edges")) {
        ExperienceEdge e;
        e.kind = je.at("kind").get<std::string>() == "undo" ? EdgeKind::undo : EdgeKind::forward;
        e.source_fp = fp(je.at("source"));
        e.dest_fp = fp(je.at("dest"));
        e.op = je.at("operation").get<Operation>();
        e.op_description = je.at("description").get<std::string>();
        e.params_used = je.at("params_used").get<std::set<std::string>>();
        if (je.contains("score")) {
            e.score = je.at("score").get<ScoreBreakdown>();
        }
        if (je.contains("check")) {
            e.check = je.at("check").get<CheckVerdict>();
        }
        if (je.contains("reverts")) {
            e.reverts = je.at("reverts").get<std::size_t>();
        }
        g.add_edge(std::move(e));
    }
    if (!j.at("endpoint").is_null()) {
        g.set_endpoint(fp(j.at("endpoint")));
    }
    return g;
}

}  // namespace explearn
