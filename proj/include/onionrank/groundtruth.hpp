#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "onionrank/corpus.hpp"

namespace onionrank::gt {

inline constexpr std::size_t kQuestions = 23;
using Answers = std::array<bool, kQuestions>;

/// Built-in copy of data/questionnaire_v1.txt.
const std::vector<std::string>& default_questionnaire();
/// One question per line, `#` lines and blank lines skipped; exactly 23.
std::vector<std::string> parse_questionnaire(std::istream& in);
std::vector<std::string> load_questionnaire(const std::filesystem::path& path);

struct AnnotationRecord {
    std::string domain_id;
    std::string annotator_id;
    Answers answers{};
};

/// {"domain_id":...,"annotator_id":...,"answers":[23 booleans]} on one line.
std::string to_json_line(const AnnotationRecord& r);
AnnotationRecord parse_record(std::string_view line);
/// Blank lines skipped; errors name the line number.
std::vector<AnnotationRecord> read_annotations(std::istream& in);
std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path);

/// Per question, true iff at least two of the three answers are true.
/// Throws DataError unless given three records of one domain by three
/// distinct annotators.
Answers majority_vote(std::span<const AnnotationRecord> records);

/// Number of true answers; throws DataError unless there are 23.
int gain(std::span<const bool> unified);
int gain(const Answers& unified);

struct GroundTruth {
    std::map<std::string, Answers> unified;
    std::map<std::string, int> gains;
};

/// Groups records by domain and votes; every domain needs exactly three.
GroundTruth build_ground_truth(std::span<const AnnotationRecord> records);

struct AnnotatorAssignment {
    std::string annotator_id;
    std::vector<std::vector<std::string>> batches;
};

struct AssignmentPlan {
    std::uint64_t seed = 0;
    std::size_t per_domain = 3;
    std::vector<AnnotatorAssignment> annotators;

    /// domain_id -> annotators judging it.
    std::map<std::string, std::vector<std::string>> judges() const;
    std::size_t assignment_count() const;
};

/// Shuffles the domains, cuts them into one chunk per annotator and hands
/// chunk c to annotators c, c+1, ..., c+per_domain-1 (mod A). Each
/// annotator's list is then cut into batches of about `batch_size`.
/// Throws DataError when there are fewer annotators than `per_domain`.
AssignmentPlan assignment_plan(std::span<const std::string> domain_ids,
                               std::span<const std::string> annotator_ids, std::size_t per_domain = 3,
                               std::size_t batch_size = 23, std::uint64_t seed = 0);

void write_plan_json(std::ostream& out, const AssignmentPlan& plan);
AssignmentPlan read_plan_json(std::istream& in);

struct SessionResult {
    std::vector<AnnotationRecord> records;  // completed in this session
    bool interrupted = false;               // input ended or the annotator quit
};

/// Terminal questionnaire loop. Domains in `already_done` are skipped. Each
/// completed domain is appended to `records_out` as one JSON line and
/// flushed before the next domain starts. Answers: y/yes/1, n/no/0; `q`
/// quits.
SessionResult annotate_interactive(const corpus::Corpus& corpus, const std::string& annotator_id,
                                   std::span<const std::string> batch,
                                   const std::vector<std::string>& questions, std::istream& in,
                                   std::ostream& prompt, std::ostream& records_out,
                                   const std::set<std::string>& already_done = {});

}  // namespace onionrank::gt
