#include "onionrank/groundtruth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "onionrank/common.hpp"

namespace onionrank::gt {

const std::vector<std::string>& default_questionnaire() {
    static const std::vector<std::string> q = {
        "Has a satisfactory FAQ?",
        "Has a professional design?",
        "Has a subjective title?",
        "Provides safe shipping?",
        "Offers reward or discount?",
        "Sell more than 10 products?",
        "Shipping worldwide service?",
        "Reputation content?",
        "Accepts only Cryptocurrency?",
        "Can customers add a review/feedback?",
        "Need text spotting for the products' images",
        "Has more than 10 sub-pages?",
        "Has a communication channel?",
        "Has real images for the products?",
        "Sells between 2 to 10 products?",
        "Domain name has a meaning?",
        "Products majority are illegal?",
        "Still accessible in TOR network?",
        "Sells at least one popular product?",
        "Requires login/ registration?",
        "Recently updated?",
        "Do you feel that this domain is trustable?",
        "Are you satisfied with the products description?",
    };
    return q;
}

std::vector<std::string> parse_questionnaire(std::istream& in) {
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        out.emplace_back(t);
    }
    if (out.size() != kQuestions)
        throw DataError("questionnaire has " + std::to_string(out.size()) + " questions, expected 23");
    return out;
}

std::vector<std::string> load_questionnaire(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open questionnaire " + path.string());
    return parse_questionnaire(in);
}

std::string to_json_line(const AnnotationRecord& r) {
    nlohmann::ordered_json j;
    j["domain_id"] = r.domain_id;
    j["annotator_id"] = r.annotator_id;
    j["answers"] = nlohmann::ordered_json::array();
    for (bool a : r.answers) j["answers"].push_back(a);
    return j.dump();
}

AnnotationRecord parse_record(std::string_view line) {
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw DataError("annotation record is not a JSON object");
    AnnotationRecord r;
    if (!j.contains("domain_id") || !j["domain_id"].is_string() || !j.contains("annotator_id") ||
        !j["annotator_id"].is_string())
        throw DataError("annotation record needs string domain_id and annotator_id");
    r.domain_id = j["domain_id"].get<std::string>();
    r.annotator_id = j["annotator_id"].get<std::string>();
    if (r.domain_id.empty() || r.annotator_id.empty())
        throw DataError("annotation record has an empty id");
    const auto& a = j.contains("answers") ? j["answers"] : nlohmann::json();
    if (!a.is_array() || a.size() != kQuestions)
        throw DataError("annotation record for \"" + r.domain_id + "\" needs 23 answers");
    for (std::size_t i = 0; i < kQuestions; ++i) {
        if (a[i].is_boolean()) r.answers[i] = a[i].get<bool>();
        else if (a[i].is_number_integer() && (a[i] == 0 || a[i] == 1)) r.answers[i] = a[i] == 1;
        else throw DataError("annotation answer " + std::to_string(i + 1) + " is not boolean");
    }
    return r;
}

std::vector<AnnotationRecord> read_annotations(std::istream& in) {
    std::vector<AnnotationRecord> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (trim(line).empty()) continue;
        try {
            out.push_back(parse_record(line));
        } catch (const DataError& e) {
            throw DataError("annotations line " + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open annotations " + path.string());
    return read_annotations(in);
}

Answers majority_vote(std::span<const AnnotationRecord> records) {
    if (records.size() != 3)
        throw DataError("majority vote needs exactly 3 records, got " + std::to_string(records.size()));
    for (std::size_t i = 1; i < 3; ++i)
        if (records[i].domain_id != records[0].domain_id)
            throw DataError("majority vote over records of different domains");
    if (records[0].annotator_id == records[1].annotator_id ||
        records[0].annotator_id == records[2].annotator_id ||
        records[1].annotator_id == records[2].annotator_id)
        throw DataError("domain \"" + records[0].domain_id + "\" judged twice by one annotator");
    Answers u{};
    for (std::size_t q = 0; q < kQuestions; ++q)
        u[q] = int(records[0].answers[q]) + int(records[1].answers[q]) + int(records[2].answers[q]) >= 2;
    return u;
}

int gain(std::span<const bool> unified) {
    if (unified.size() != kQuestions)
        throw DataError("answer vector has " + std::to_string(unified.size()) + " entries, expected 23");
    return static_cast<int>(std::count(unified.begin(), unified.end(), true));
}

int gain(const Answers& unified) { return gain(std::span<const bool>(unified)); }

GroundTruth build_ground_truth(std::span<const AnnotationRecord> records) {
    std::map<std::string, std::vector<AnnotationRecord>> by_domain;
    for (const auto& r : records) by_domain[r.domain_id].push_back(r);
    GroundTruth gt;
    for (const auto& [id, recs] : by_domain) {
        if (recs.size() != 3)
            throw DataError("domain \"" + id + "\" has " + std::to_string(recs.size()) +
                            " annotation records, expected 3");
        Answers u = majority_vote(recs);
        gt.unified[id] = u;
        gt.gains[id] = gain(u);
    }
    return gt;
}

std::map<std::string, std::vector<std::string>> AssignmentPlan::judges() const {
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& a : annotators)
        for (const auto& b : a.batches)
            for (const auto& d : b) out[d].push_back(a.annotator_id);
    return out;
}

std::size_t AssignmentPlan::assignment_count() const {
    std::size_t n = 0;
    for (const auto& a : annotators)
        for (const auto& b : a.batches) n += b.size();
    return n;
}

namespace {

// Cuts [0, n) into `parts` contiguous ranges whose sizes differ by at most one.
std::vector<std::pair<std::size_t, std::size_t>> even_ranges(std::size_t n, std::size_t parts) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t begin = 0;
    for (std::size_t p = 0; p < parts; ++p) {
        std::size_t len = n / parts + (p < n % parts ? 1 : 0);
        out.emplace_back(begin, begin + len);
        begin += len;
    }
    return out;
}

}  // namespace

AssignmentPlan assignment_plan(std::span<const std::string> domain_ids,
                               std::span<const std::string> annotator_ids, std::size_t per_domain,
                               std::size_t batch_size, std::uint64_t seed) {
    if (per_domain == 0) throw DataError("per_domain must be positive");
    if (batch_size == 0) throw DataError("batch_size must be positive");
    std::vector<std::string> annotators(annotator_ids.begin(), annotator_ids.end());
    std::vector<std::string> sorted = annotators;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw DataError("duplicate annotator id");
    if (annotators.size() < per_domain)
        throw DataError("assignment needs at least " + std::to_string(per_domain) +
                        " annotators, got " + std::to_string(annotators.size()));
    std::vector<std::string> domains(domain_ids.begin(), domain_ids.end());
    std::sort(domains.begin(), domains.end());
    if (std::adjacent_find(domains.begin(), domains.end()) != domains.end())
        throw DataError("duplicate domain id in assignment input");

    std::mt19937_64 rng(seed);
    deterministic_shuffle(domains, rng);

    const std::size_t a_count = annotators.size();
    auto chunks = even_ranges(domains.size(), a_count);
    std::vector<std::vector<std::string>> lists(a_count);
    for (std::size_t round = 0; round < per_domain; ++round)
        for (std::size_t c = 0; c < a_count; ++c) {
            auto& list = lists[(c + round) % a_count];
            list.insert(list.end(), domains.begin() + chunks[c].first, domains.begin() + chunks[c].second);
        }

    AssignmentPlan plan;
    plan.seed = seed;
    plan.per_domain = per_domain;
    for (std::size_t a = 0; a < a_count; ++a) {
        AnnotatorAssignment asg{annotators[a], {}};
        const auto& list = lists[a];
        std::size_t n_batches = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(double(list.size()) / double(batch_size))));
        if (!list.empty())
            for (auto [b, e] : even_ranges(list.size(), n_batches))
                asg.batches.emplace_back(list.begin() + b, list.begin() + e);
        plan.annotators.push_back(std::move(asg));
    }
    return plan;
}

void write_plan_json(std::ostream& out, const AssignmentPlan& plan) {
    nlohmann::ordered_json j;
    j["seed"] = plan.seed;
    j["per_domain"] = plan.per_domain;
    j["annotators"] = nlohmann::ordered_json::array();
    for (const auto& a : plan.annotators)
        j["annotators"].push_back({{"annotator_id", a.annotator_id}, {"batches", a.batches}});
    out << j.dump(2) << '\n';
}

AssignmentPlan read_plan_json(std::istream& in) {
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw DataError("assignment plan is not valid JSON");
    AssignmentPlan plan;
    try {
        plan.seed = j.at("seed").get<std::uint64_t>();
        plan.per_domain = j.at("per_domain").get<std::size_t>();
        for (const auto& a : j.at("annotators"))
            plan.annotators.push_back({a.at("annotator_id").get<std::string>(),
                                       a.at("batches").get<std::vector<std::vector<std::string>>>()});
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("assignment plan: ") + e.what());
    }
    return plan;
}

namespace {

constexpr std::size_t kSummaryChars = 600;

std::string summary_of(const corpus::Domain& d) {
    std::string text = collapse_whitespace(d.text());
    if (text.size() > kSummaryChars) text = text.substr(0, kSummaryChars) + " ...";
    return text;
}

}  // namespace

SessionResult annotate_interactive(const corpus::Corpus& corpus, const std::string& annotator_id,
                                   std::span<const std::string> batch,
                                   const std::vector<std::string>& questions, std::istream& in,
                                   std::ostream& prompt, std::ostream& records_out,
                                   const std::set<std::string>& already_done) {
    if (questions.size() != kQuestions) throw DataError("questionnaire must have 23 questions");
    for (const auto& id : batch)
        if (!corpus.find(id)) throw DataError("batch domain \"" + id + "\" is not in the corpus");

    SessionResult result;
    std::size_t position = 0;
    for (const auto& id : batch) {
        ++position;
        if (already_done.contains(id)) continue;
        const corpus::Domain& d = *corpus.find(id);
        prompt << "\n=== [" << position << '/' << batch.size() << "] " << d.domain_id << " ("
               << d.address << ") ===\n"
               << summary_of(d) << "\n\n";
        AnnotationRecord rec{d.domain_id, annotator_id, {}};
        for (std::size_t q = 0; q < kQuestions; ++q) {
            for (;;) {
                prompt << '(' << q + 1 << "/23) " << questions[q] << " [y/n] " << std::flush;
                std::string line;
                if (!std::getline(in, line)) {
                    result.interrupted = true;
                    return result;
                }
                std::string a = to_lower(trim(line));
                if (a == "q" || a == "quit") {
                    result.interrupted = true;
                    return result;
                }
                if (a == "y" || a == "yes" || a == "1") {
                    rec.answers[q] = true;
                    break;
                }
                if (a == "n" || a == "no" || a == "0") {
                    rec.answers[q] = false;
                    break;
                }
                prompt << "please answer y or n (q to stop)\n";
            }
        }
        records_out << to_json_line(rec) << '\n' << std::flush;
        result.records.push_back(std::move(rec));
    }
    return result;
}

}  // namespace onionrank::gt
