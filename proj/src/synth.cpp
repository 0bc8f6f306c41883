#include "onionrank/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "onionrank/common.hpp"

namespace onionrank::synth {

namespace fs = std::filesystem;
using Rng = std::mt19937_64;

void SynthConfig::validate() const {
    if (n_domains < 10) throw DataError("synthetic corpus needs at least 10 domains");
    if (!(sigma >= 0.0 && sigma <= 1.0)) throw DataError("sigma must lie in [0, 1]");
    if (!(link_density >= 0.0 && link_density <= 1.0)) throw DataError("link density must lie in [0, 1]");
    if (!(signal >= 0.0 && signal <= 1.0)) throw DataError("signal weight must lie in [0, 1]");
    if (n_annotators < 3) throw DataError("need at least 3 simulated annotators");
}

namespace {

constexpr std::array kProducts = {
    "cocaine",  "heroin",    "mdma",       "lsd",      "cannabis", "ketamine", "xanax",
    "oxycodone", "hashish",  "psilocybin", "fentanyl", "amphetamine", "tramadol", "valium",
    "adderall", "methadone", "white widow", "og kush",
};
constexpr std::array kLocations = {"netherlands", "germany", "united kingdom", "canada", "australia",
                                   "spain",       "france",  "colombia",       "europe", "usa"};
constexpr std::array kOrgs = {"europol", "interpol", "dea", "fbi", "customs office"};
constexpr std::array kCompanies = {"dream market", "wall street market", "alphabay"};
constexpr std::array kPeople = {"walter white", "tony montana", "pablo escobar", "frank lucas"};
constexpr std::array kCreative = {"breaking bad", "trainspotting", "narcos"};
constexpr std::array kGroups = {"hells angels", "sinaloa cartel", "yakuza"};

// Market vocabulary: product descriptions draw from it, so the number of
// distinct terms a domain uses grows with its product paragraphs.
constexpr std::array kMarketWords = {
    "quality",  "shipping", "stealth",   "escrow",   "vendor",   "price",    "gram",     "order",
    "delivery", "discount", "review",    "feedback", "pure",     "tested",   "lab",      "premium",
    "bulk",     "sample",   "tracking",  "refund",   "reship",   "pgp",      "bitcoin",  "monero",
    "wallet",   "secure",   "fast",      "worldwide", "domestic", "express", "package",  "vacuum",
    "sealed",   "batch",    "strain",    "potency",  "dosage",   "pill",     "powder",   "crystal",
    "organic",  "indoor",   "outdoor",   "harvest",  "fresh",    "grade",    "top",      "best",
    "cheap",    "offer",    "deal",      "stock",    "available", "guarantee", "trusted", "reliable",
    "customer", "support",  "contact",   "message",  "encrypted", "anonymous", "privacy", "safe",
    "discreet", "packaging", "overnight", "priority", "insured",  "verified",  "rating",  "rated",
    "vendors",  "listing",  "category",  "catalog",  "special",  "promo",    "coupon",   "bonus",
    "loyalty",  "points",   "members",   "forum",    "news",     "update",   "faq",      "rules",
    "terms",    "policy",   "returns",   "dispute",  "finalize", "early",    "multisig", "address",
};
constexpr std::array kFillerWords = {"the", "and", "for", "with", "our", "you", "are", "this",
                                     "we",  "all", "is",  "of",   "to",  "in",  "your", "from"};
constexpr std::array kVanityWords = {"drug",   "market", "shop", "store",  "green", "candy", "pharma",
                                     "dream",  "happy",  "bazaar", "trade", "weed",  "pill",  "silk",
                                     "road",   "express", "best", "dark",  "king",  "medic"};
constexpr std::array kCommonWords = {"the",  "and",   "for",  "with", "you",  "this", "that", "from",
                                     "have", "not",   "are",  "but",  "all",  "new",  "one",  "more",
                                     "home", "about", "time", "page", "free", "day",  "world", "city"};
constexpr std::array kSuspicious = {"Drugs", "Drugs", "Drugs", "Cryptocurrency", "Counterfeit Money",
                                    "Counterfeit Credit Cards", "Hacking", "Counterfeit Personal Identification",
                                    "Pornography", "Violence"};
constexpr std::array kMonths = {"January", "February", "March",     "April",   "May",      "June",
                                "July",    "August",   "September", "October", "November", "December"};
constexpr char kBase32[] = "abcdefghijklmnopqrstuvwxyz234567";
constexpr double kLatentMax = 23.0;

// Independent stream per purpose so that changing one part of the generator
// does not reshuffle the others.
Rng stream(std::uint64_t seed, std::uint64_t id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32)};
    return Rng(seq);
}

template <class Arr>
const char* pick(const Arr& a, Rng& rng) {
    return a[uniform_index(rng, a.size())];
}

bool coin(Rng& rng, double p) { return uniform01(rng) < p; }

int round_nonneg(double x) { return std::max(0, static_cast<int>(std::lround(x))); }

struct Signals {
    double text, ner, html, visual, name;
};

std::string civil_date(corpus::Timestamp t, int style) {
    auto days = std::chrono::floor<std::chrono::days>(t);
    std::chrono::year_month_day ymd{days};
    int y = static_cast<int>(ymd.year());
    unsigned m = static_cast<unsigned>(ymd.month());
    unsigned d = static_cast<unsigned>(ymd.day());
    char buf[64];
    switch (style) {
        case 0: std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, d); break;
        case 1: std::snprintf(buf, sizeof buf, "%02u/%02u/%04d", d, m, y); break;
        default: std::snprintf(buf, sizeof buf, "%s %u, %04d", kMonths[m - 1], d, y); break;
    }
    return buf;
}

std::string make_address(double name_signal, Rng& rng, const std::set<std::string>& taken) {
    for (;;) {
        std::string a;
        if (coin(rng, name_signal)) {
            a += pick(kVanityWords, rng);
            if (coin(rng, name_signal)) a += pick(kVanityWords, rng);
        }
        while (a.size() < 16) a += kBase32[uniform_index(rng, 32)];
        a.resize(16);
        if (!taken.contains(a)) return a;
    }
}

std::string product_paragraph(Rng& rng, double ner_signal) {
    std::string p = "<p>";
    p += pick(kProducts, rng);
    int words = 6 + static_cast<int>(uniform_index(rng, 5));
    for (int i = 0; i < words; ++i) {
        p += ' ';
        p += pick(kMarketWords, rng);
        if (coin(rng, 0.3)) {
            p += ' ';
            p += pick(kFillerWords, rng);
        }
    }
    p += " price " + std::to_string(10 + uniform_index(rng, 490)) + " usd";
    if (coin(rng, ner_signal)) {
        p += " ships from ";
        p += pick(kLocations, rng);
    }
    p += ".</p>\n";
    return p;
}

struct DomainPlan {
    SynthDomain info;
    Signals s{};
};

struct PageSet {
    std::vector<std::pair<std::string, std::string>> pages;  // page_id, html
};

PageSet build_pages(const DomainPlan& plan, const std::vector<std::string>& link_targets,
                    corpus::Timestamp scrape, Rng& rng, std::size_t uniq) {
    const Signals& s = plan.s;
    PageSet out;

    // Near-empty domains share one placeholder page; they end up as clones.
    if (s.text < 0.08) {
        std::string html =
            "<html><head><title></title></head><body><p>site under construction, come back "
            "later</p>\n";
        for (const auto& target : link_targets) html += "<a href=\"http://" + target + ".onion/\"></a>\n";
        out.pages.emplace_back("index", html + "</body></html>\n");
        return out;
    }

    const int paragraphs = 1 + round_nonneg(s.text * 14.0);
    const int n_dates = round_nonneg(s.text * 4.0);
    const int images = round_nonneg(s.html * 8.0);
    const int internal = round_nonneg(s.html * 10.0);
    const int external = static_cast<int>(uniform_index(rng, 4));
    const int loc_mentions = round_nonneg(s.ner * 7.0);
    const int org_mentions = round_nonneg(s.ner * 4.0);
    const bool has_title = coin(rng, 0.15 + 0.85 * s.html);
    const bool has_h1 = coin(rng, 0.1 + 0.9 * s.html);
    const bool credential = coin(rng, s.html);

    std::string head = "<!DOCTYPE html>\n<html><head>";
    if (has_title) {
        head += "<title>";
        head += pick(kProducts, rng);
        head += ' ';
        head += pick(kMarketWords, rng);
        head += " store</title>";
    }
    head += "<style>body { font-family: sans-serif; }</style></head>\n<body>\n";
    std::string tail = "<script>var session = \"" + std::to_string(uniq) + "\";</script>\n</body></html>\n";

    std::string index = head;
    if (has_h1) {
        index += "<h1>";
        index += pick(kMarketWords, rng);
        index += ' ';
        index += pick(kProducts, rng);
        index += "</h1>\n";
    }
    index += "<!-- generated page -->\n<div class=\"nav\">";
    for (int i = 0; i < internal; ++i) index += "<a href=\"/item/" + std::to_string(i) + "\">item " + std::to_string(i) + "</a> ";
    index += "<a href=\"/\">home</a></div>\n";
    index += "<p>welcome to our shop, id " + std::to_string(uniq) + ".</p>\n";
    for (int i = 0; i < n_dates; ++i) {
        bool recent = coin(rng, s.text);
        long back = recent ? 1 + static_cast<long>(uniform_index(rng, 80))
                           : 120 + static_cast<long>(uniform_index(rng, 800));
        auto t = scrape - std::chrono::days{back};
        index += "<p>updated " + civil_date(t, static_cast<int>(uniform_index(rng, 3))) + "</p>\n";
    }
    for (int i = 0; i < loc_mentions; ++i) {
        index += "<p>we deliver to ";
        index += pick(kLocations, rng);
        index += "</p>\n";
    }
    for (int i = 0; i < org_mentions; ++i) {
        index += "<p>no trouble with ";
        index += coin(rng, 0.5) ? pick(kOrgs, rng) : pick(kCompanies, rng);
        index += "</p>\n";
    }
    if (coin(rng, s.ner)) {
        index += "<p>as seen in ";
        index += pick(kCreative, rng);
        index += ", trusted by ";
        index += pick(kPeople, rng);
        index += " and the ";
        index += pick(kGroups, rng);
        index += "</p>\n";
    }
    for (const auto& target : link_targets)
        index += "<a href=\"http://" + target + ".onion/\">partner</a>\n";
    for (int i = 0; i < external; ++i)
        index += "<a href=\"https://news" + std::to_string(i) + ".example.org/story\">news</a>\n";
    if (credential)
        index += "<form><input type=\"text\" name=\"username\"><input type=\"password\" name=\"pw\"></form>\n";
    index += tail;
    out.pages.emplace_back("index", std::move(index));

    std::string products = head + "<div class=\"products\">\n";
    for (int i = 0; i < paragraphs; ++i) products += product_paragraph(rng, s.ner);
    for (int i = 0; i < images; ++i) {
        products += "<img src=\"/img/" + std::to_string(i) + ".jpg\" alt=\"";
        products += pick(kProducts, rng);
        products += ' ';
        products += pick(kMarketWords, rng);
        products += "\">\n";
    }
    products += "</div>\n" + tail;
    out.pages.emplace_back("products", std::move(products));

    if (s.text > 0.5) {
        std::string about = head + "<p>about us: ";
        for (int i = 0; i < 20; ++i) {
            about += pick(kMarketWords, rng);
            about += ' ';
        }
        about += "</p>\n" + tail;
        out.pages.emplace_back("about", std::move(about));
    }
    return out;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw DataError("cannot write " + p.string());
    out << content;
}

}  // namespace

SynthOutput generate_corpus(const SynthConfig& config, const fs::path& out_dir) {
    config.validate();
    const std::size_t n = config.n_domains;
    const std::size_t digits = std::max<std::size_t>(4, std::to_string(n).size());

    Rng latent_rng = stream(config.seed, 1);
    Rng signal_rng = stream(config.seed, 2);
    Rng name_rng = stream(config.seed, 3);
    Rng answer_rng = stream(config.seed, 4);
    Rng link_rng = stream(config.seed, 5);

    std::vector<DomainPlan> plans(n);
    std::set<std::string> addresses;
    const double w = config.signal;
    for (std::size_t i = 0; i < n; ++i) {
        auto& p = plans[i];
        std::string num = std::to_string(i + 1);
        p.info.domain_id = "hs" + std::string(digits - num.size(), '0') + num;
        p.info.latent = uniform01(latent_rng) * kLatentMax;
        p.info.planted_gain = static_cast<int>(std::lround(p.info.latent));
        double a = p.info.latent / kLatentMax;
        auto mix = [&] { return w * a + (1.0 - w) * uniform01(signal_rng); };
        p.s = {mix(), mix(), mix(), mix(), mix()};
        p.info.address = make_address(p.s.name, name_rng, addresses);
        addresses.insert(p.info.address);

        std::vector<std::size_t> qs(gt::kQuestions);
        for (std::size_t q = 0; q < qs.size(); ++q) qs[q] = q;
        deterministic_shuffle(qs, answer_rng);
        for (int k = 0; k < p.info.planted_gain; ++k) p.info.planted_answers[qs[k]] = true;
    }

    // Links u -> v are more likely the more attractive v is.
    SynthOutput out;
    std::vector<std::vector<std::string>> outbound(n);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v) {
            if (u == v) continue;
            double av = plans[v].info.latent / kLatentMax;
            double prob = std::min(1.0, config.link_density * (0.15 + 2.8 * av * av));
            if (coin(link_rng, prob)) {
                outbound[u].push_back(plans[v].info.address);
                out.edges.emplace_back(plans[u].info.domain_id, plans[v].info.domain_id);
            }
        }
    std::sort(out.edges.begin(), out.edges.end());

    const fs::path corpus_dir = out_dir / "corpus";
    fs::create_directories(corpus_dir);
    std::ostringstream visual;
    Rng page_rng = stream(config.seed, 6);
    Rng visual_rng = stream(config.seed, 7);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = plans[i];
        fs::path dom = corpus_dir / p.info.domain_id;
        fs::create_directories(dom / "pages");
        nlohmann::ordered_json meta;
        meta["address"] = p.info.address;
        meta["scrape_time"] = corpus::format_rfc3339(config.scrape_time);
        write_file(dom / "meta.json", meta.dump(2) + "\n");
        for (const auto& [pid, html] : build_pages(p, outbound[i], config.scrape_time, page_rng, i).pages)
            write_file(dom / "pages" / (pid + ".html"), html);

        int suspicious = round_nonneg(p.s.visual * 6.0);
        int noise = round_nonneg((1.0 - p.s.visual) * 3.0);
        int k = 0;
        auto record = [&](const char* cat, double conf) {
            nlohmann::ordered_json r;
            r["domain_id"] = p.info.domain_id;
            r["image_ref"] = p.info.domain_id + "/img" + std::to_string(k++) + ".jpg";
            r["category"] = cat;
            r["confidence"] = std::round(conf * 1000.0) / 1000.0;
            visual << r.dump() << '\n';
        };
        for (int j = 0; j < suspicious; ++j) record(pick(kSuspicious, visual_rng), 0.55 + 0.45 * uniform01(visual_rng));
        for (int j = 0; j < noise; ++j) record("Others", 0.5 + 0.5 * uniform01(visual_rng));
    }
    write_file(out_dir / "visual.jsonl", visual.str());

    std::ostringstream gaz;
    for (auto w2 : kProducts) gaz << w2 << "\tPRD\n";
    for (auto w2 : kLocations) gaz << w2 << "\tLOC\n";
    for (auto w2 : kOrgs) gaz << w2 << "\tORG\n";
    for (auto w2 : kCompanies) gaz << w2 << "\tCOR\n";
    for (auto w2 : kPeople) gaz << w2 << "\tPER\n";
    for (auto w2 : kCreative) gaz << w2 << "\tCRTV\n";
    for (auto w2 : kGroups) gaz << w2 << "\tGRP\n";
    write_file(out_dir / "gazetteer.tsv", gaz.str());

    std::vector<std::string> lex;
    auto add_words = [&](const auto& arr) {
        for (auto w2 : arr)
            if (std::find(lex.begin(), lex.end(), w2) == lex.end()) lex.emplace_back(w2);
    };
    add_words(kCommonWords);
    add_words(kVanityWords);
    add_words(kMarketWords);
    std::string lex_text;
    for (const auto& w2 : lex) lex_text += w2 + "\n";
    write_file(out_dir / "lexicon.txt", lex_text);

    // Simulated annotators: three judges per domain from the assignment plan,
    // each flipping every planted answer with probability sigma.
    std::vector<std::string> ids, annotators;
    for (const auto& p : plans) ids.push_back(p.info.domain_id);
    for (std::size_t a = 0; a < config.n_annotators; ++a) {
        std::string num = std::to_string(a + 1);
        annotators.push_back("annotator" + std::string(num.size() < 2 ? 2 - num.size() : 0, '0') + num);
    }
    auto judges = gt::assignment_plan(ids, annotators, 3, 23, config.seed).judges();
    Rng flip_rng = stream(config.seed, 8);
    std::string ann_text;
    for (const auto& p : plans) {
        auto js = judges.at(p.info.domain_id);
        std::sort(js.begin(), js.end());
        for (const auto& judge : js) {
            gt::AnnotationRecord r{p.info.domain_id, judge, p.info.planted_answers};
            for (bool& b : r.answers)
                if (coin(flip_rng, config.sigma)) b = !b;
            ann_text += gt::to_json_line(r) + "\n";
            out.annotations.push_back(std::move(r));
        }
    }
    write_file(out_dir / "annotations.jsonl", ann_text);

    std::string planted = "domain_id,latent_gain\n";
    for (const auto& p : plans) planted += p.info.domain_id + "," + format_double(p.info.latent) + "\n";
    write_file(out_dir / "planted.csv", planted);

    std::string edges;
    for (const auto& [a, b] : out.edges) edges += a + "\t" + b + "\n";
    write_file(out_dir / "planted_edges.tsv", edges);

    for (auto& p : plans) out.domains.push_back(std::move(p.info));
    return out;
}

}  // namespace onionrank::synth
