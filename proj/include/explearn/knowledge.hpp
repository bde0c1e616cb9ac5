#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "explearn/embedding.hpp"
#include "explearn/experience.hpp"
#include "explearn/gui.hpp"
#include "explearn/oracle.hpp"

namespace explearn {

/// Where an item came from. `sequence` is a logical clock owned by the
/// knowledge base, so saved files do not depend on wall time.
struct Provenance {
    std::string task_id;
    std::uint64_t sequence = 0;
    bool operator==(const Provenance&) const = default;
};

struct EnvTriplet {
    std::string app_id;
    PageFingerprint source_fp;
    PageFingerprint dest_fp;
    std::string source_page_text;
    std::string dest_page_text;
    Operation op;
    std::string op_description;
    Provenance provenance;
    bool operator==(const EnvTriplet&) const = default;
};

struct EnvLesson {
    std::string app_id;
    std::string text;
    Embedding embedding;
    Provenance provenance;
    bool operator==(const EnvLesson&) const = default;
};

struct TaskKnowledgeItem {
    std::string app_id;
    std::string intent_name;
    std::vector<std::string> parameter_names;
    std::string command;
    std::map<std::string, std::string> parameter_values;
    Embedding embedding;  // of the command
    Provenance provenance;

    TaskExample example() const;
    bool operator==(const TaskKnowledgeItem&) const = default;
};

/// One templated step. Element text and parameter may be a literal or a
/// placeholder such as "<file name>".
struct ExecStep {
    ActionKind action = ActionKind::click;
    std::string element_text;
    std::optional<std::string> parameter;
    bool operator==(const ExecStep&) const = default;
};

struct ExecSequence {
    std::string app_id;
    std::string intent_name;
    std::vector<ExecStep> steps;
    Embedding embedding;  // of the intent name
    Provenance provenance;

    /// e.g. "click 'Fix & Manage', click 'Import from file', click <file name>"
    std::string render() const;
    bool operator==(const ExecSequence&) const = default;
};

struct ExecLesson {
    std::string app_id;
    std::string text;
    Embedding embedding;
    Provenance provenance;
    bool operator==(const ExecLesson&) const = default;
};

class KnowledgeLoadError : public std::runtime_error {
public:
    KnowledgeLoadError(std::string file, std::size_t line, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + what), file_(std::move(file)), line_(line) {}
    const std::string& file() const { return file_; }
    std::size_t line() const { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

/// Five stores, each namespaced by app id. Retrieval never mutates.
class KnowledgeBase {
public:
    /// Returns false for a duplicate (same app, fingerprints and operation).
    bool record_triplet(EnvTriplet triplet);
    bool add_env_lesson(EnvLesson lesson);
    bool add_task_item(TaskKnowledgeItem item);
    bool add_exec_sequence(ExecSequence sequence);
    bool add_exec_lesson(ExecLesson lesson);

    /// Appends everything from `other` (deduplicated) and advances the clock.
    void merge(const KnowledgeBase& other);

    const std::vector<EnvTriplet>& triplets() const { return triplets_; }
    const std::vector<EnvLesson>& env_lessons() const { return env_lessons_; }
    const std::vector<TaskKnowledgeItem>& task_items() const { return task_items_; }
    const std::vector<ExecSequence>& exec_sequences() const { return exec_sequences_; }
    const std::vector<ExecLesson>& exec_lessons() const { return exec_lessons_; }

    bool empty() const;
    std::size_t size() const;
    std::uint64_t next_sequence() { return ++clock_; }
    std::uint64_t clock() const { return clock_; }

    /// Targets annotation: for each current-page element, descriptions of
    /// elements reachable through recorded triplets (at most `max_depth`
    /// hops, first hop starting at that element) whose similarity to the
    /// command exceeds `threshold`.
    std::map<std::string, std::vector<std::string>> reachable_relevant_elements(
        const GuiPage& page, const Embedding& command_embedding, double threshold, Embedder& embedder,
        std::size_t max_depth = 4) const;

    /// Lessons and rendered sequences scoring above `threshold`, best first.
    std::vector<std::string> relevant_lessons(std::string_view app_id, const Embedding& context_embedding,
                                              double threshold) const;

    std::vector<TaskKnowledgeItem> similar_task_examples(std::string_view app_id, const Embedding& command_embedding,
                                                         double threshold) const;

    /// Sequences whose intent embedding reaches `threshold`, best first.
    std::vector<ExecSequence> matching_sequences(std::string_view app_id, const Embedding& intent_embedding,
                                                 double threshold) const;

    /// One .jsonl file per store under `dir`, each replaced atomically.
    void save(const std::filesystem::path& dir) const;
    static KnowledgeBase load(const std::filesystem::path& dir);

    bool operator==(const KnowledgeBase&) const = default;

private:
    std::vector<EnvTriplet> triplets_;
    std::vector<EnvLesson> env_lessons_;
    std::vector<TaskKnowledgeItem> task_items_;
    std::vector<ExecSequence> exec_sequences_;
    std::vector<ExecLesson> exec_lessons_;
    std::uint64_t clock_ = 0;
};

/// Replaces parameter values in element texts and text-input parameters by
/// "<name>", longest value first.
ExecSequence templatize_sequence(const std::vector<ExperienceEdge>& path, const CommandUnderstanding& understanding,
                                 std::string_view app_id, Embedder& embedder);

/// Fills "<name>" placeholders; nothing when a placeholder has no value.
std::optional<std::vector<ExecStep>> instantiate_sequence(const ExecSequence& sequence,
                                                          const std::map<std::string, std::string>& parameters);

struct SummaryReport {
    bool sequence_added = false;
    bool task_item_added = false;
    std::size_t env_lessons_added = 0;
    std::size_t exec_lessons_added = 0;
    std::optional<std::string> skipped_reason;
    std::vector<ExperienceEdge> correct_path;
    std::vector<ExperienceEdge> erroneous;
};

/// Distils a completed run into sequences, task knowledge and lessons.
/// Triplets are recorded during execution, not here.
SummaryReport summarize_after_completion(KnowledgeBase& kb, const ExperienceGraph& graph, const std::string& command,
                                         const CommandUnderstanding& understanding, Oracle& oracle,
                                         std::string_view app_id, std::string_view task_id);

}  // namespace explearn
