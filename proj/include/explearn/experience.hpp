#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "explearn/gui.hpp"
#include "explearn/scoring.hpp"

namespace explearn {

enum class EdgeKind { forward, undo };

struct ExperienceEdge {
    PageFingerprint source_fp;
    PageFingerprint dest_fp;
    Operation op;
    std::string op_description;
    std::optional<ScoreBreakdown> score;
    std::optional<CheckVerdict> check;
    EdgeKind kind = EdgeKind::forward;
    std::size_t step_index = 0;  // 1-based, one per executed step
    std::set<std::string> params_used;
    std::optional<std::size_t> reverts;  // undo edges: index of the forward edge undone

    bool operator==(const ExperienceEdge&) const = default;
};

class PathExtractionError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Run-scoped record of pages visited and operations tried.
class ExperienceGraph {
public:
    ExperienceGraph() = default;
    explicit ExperienceGraph(const GuiPage& start_page);

    /// Upserts both pages and appends an edge; returns its index.
    std::size_t record_step(const GuiPage& source, const Operation& op, const GuiPage& dest,
                            std::optional<ScoreBreakdown> score, std::optional<CheckVerdict> check, EdgeKind kind,
                            std::set<std::string> params_used = {}, std::optional<std::size_t> reverts = {});

    /// Same as record_step but for pages already identified by fingerprint;
    /// used by tests and importers.
    std::size_t add_edge(ExperienceEdge edge);
    void add_node(PageFingerprint fp, std::string page_text);

    void attach_check(std::size_t edge_index, CheckVerdict verdict);
    void set_endpoint(PageFingerprint fp);
    void clear_endpoint() { endpoint_fp_.reset(); }

    const std::map<PageFingerprint, std::string>& nodes() const { return nodes_; }
    const std::vector<ExperienceEdge>& edges() const { return edges_; }
    PageFingerprint start_fp() const { return start_fp_; }
    const std::optional<PageFingerprint>& endpoint_fp() const { return endpoint_fp_; }
    void set_start(PageFingerprint fp) { start_fp_ = fp; }

    std::size_t forward_count() const;
    std::size_t undo_count() const;
    const std::string* page_text(PageFingerprint fp) const;

    bool operator==(const ExperienceGraph&) const = default;

private:
    std::map<PageFingerprint, std::string> nodes_;
    std::vector<ExperienceEdge> edges_;
    PageFingerprint start_fp_;
    std::optional<PageFingerprint> endpoint_fp_;
};

/// Fewest distinct forward edges leading from the start to the endpoint and
/// covering `required_params`; ties go to the earliest step indices. The
/// path has at least one edge. Throws PathExtractionError.
std::vector<ExperienceEdge> shortest_correct_path(const ExperienceGraph& graph,
                                                  const std::set<std::string>& required_params);

/// Forward edges not on `correct_path`, in step order.
std::vector<ExperienceEdge> erroneous_steps(const ExperienceGraph& graph,
                                            const std::vector<ExperienceEdge>& correct_path);

/// JSON dump with nodes, edges and scores.
std::string export_graph(const ExperienceGraph& graph);
ExperienceGraph import_graph(std::string_view text);

}  // namespace explearn
