#include "cgr/evalkit.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "cgr/errors.hpp"
#include "cgr/text.hpp"
#include "json.hpp"

namespace cgr {

namespace {

using nlohmann::ordered_json;

double round2(double value) { return std::round(value * 100.0) / 100.0; }

std::vector<std::string> answer_tokens(std::string_view text) {
    return split_whitespace(normalize_answer(text));
}

/// Maps every rating to a category index. Categories are either supplied
/// (ordinal) or collected from the data in sorted order (nominal).
struct CategorySpace {
    std::vector<std::string> names;
    std::unordered_map<std::string, std::size_t> index;
};

CategorySpace make_categories(const std::vector<std::vector<std::string>>& ratings,
                              const std::vector<std::string>* ordered) {
    CategorySpace space;
    if (ordered != nullptr) {
        space.names = *ordered;
    } else {
        for (const auto& row : ratings) {
            for (const auto& value : row) space.names.push_back(value);
        }
        std::sort(space.names.begin(), space.names.end());
        space.names.erase(std::unique(space.names.begin(), space.names.end()),
                          space.names.end());
    }
    for (std::size_t i = 0; i < space.names.size(); ++i) {
        if (!space.index.emplace(space.names[i], i).second) {
            throw ConfigError("duplicate category: " + space.names[i]);
        }
    }
    return space;
}

void check_matrix(const std::vector<std::vector<std::string>>& ratings) {
    if (ratings.empty()) throw ConfigError("agreement needs at least one item");
    std::size_t raters = ratings.front().size();
    if (raters < 2) throw ConfigError("agreement needs at least two raters");
    for (const auto& row : ratings) {
        if (row.size() != raters) throw ConfigError("ragged ratings matrix");
    }
}

/// Gwet's chance-corrected agreement in its algebraic form: percent
/// agreement from within-item category counts, chance agreement from mean
/// category prevalence scaled by the total weight mass.
double gwet_generic(const std::vector<std::vector<std::string>>& ratings,
                    const CategorySpace& space,
                    const std::function<double(std::size_t, std::size_t)>& weight) {
    check_matrix(ratings);
    const std::size_t n = ratings.size();
    const std::size_t r = ratings.front().size();
    const std::size_t q = space.names.size();

    // Fewer than two categories on the scale: every rating necessarily
    // agrees and chance agreement is total. 1.0 by convention.
    if (q < 2) return 1.0;

    double pa_sum = 0.0;
    std::vector<double> prevalence(q, 0.0);
    std::vector<double> counts(q);
    for (const auto& row : ratings) {
        std::fill(counts.begin(), counts.end(), 0.0);
        for (const auto& value : row) {
            auto it = space.index.find(value);
            if (it == space.index.end()) {
                throw ConfigError("rating outside the category scale: " + value);
            }
            counts[it->second] += 1.0;
        }
        double item_sum = 0.0;
        for (std::size_t k = 0; k < q; ++k) {
            if (counts[k] == 0.0) continue;
            double weighted = 0.0;  // raters weighted by closeness to category k
            for (std::size_t l = 0; l < q; ++l) weighted += weight(k, l) * counts[l];
            item_sum += counts[k] * (weighted - 1.0);
        }
        pa_sum += item_sum / (static_cast<double>(r) * (r - 1));
        for (std::size_t k = 0; k < q; ++k) prevalence[k] += counts[k] / r;
    }
    double pa = pa_sum / n;

    double weight_mass = 0.0;
    for (std::size_t k = 0; k < q; ++k) {
        for (std::size_t l = 0; l < q; ++l) weight_mass += weight(k, l);
    }
    double spread = 0.0;
    for (std::size_t k = 0; k < q; ++k) {
        double pi = prevalence[k] / n;
        spread += pi * (1.0 - pi);
    }
    double pe = weight_mass / (static_cast<double>(q) * (q - 1)) * spread;

    if (1.0 - pe == 0.0) {
        if (pa == 1.0) return 1.0;
        throw DegenerateScale("chance agreement is 1 with imperfect observed agreement");
    }
    return (pa - pe) / (1.0 - pe);
}

std::string json_field(const ordered_json& row, const char* key, std::size_t line,
                       bool required) {
    auto it = row.find(key);
    if (it == row.end() || it->is_null()) {
        if (required) throw FormatError(std::string("item misses field: ") + key, line);
        return {};
    }
    if (!it->is_string()) throw FormatError(std::string("field is not a string: ") + key, line);
    return it->get<std::string>();
}

}  // namespace

std::string to_string(ItemViolation violation) {
    switch (violation) {
        case ItemViolation::ModifierMissing: return "modifier_missing";
        case ItemViolation::AnswerNotDivergent: return "answer_not_divergent";
        case ItemViolation::MissingDocuments: return "missing_documents";
    }
    return "unknown";
}

std::vector<ItemViolation> validate_item(const BenchmarkItem& item) {
    std::vector<ItemViolation> violations;
    if (item.condition.has_value()) {
        auto question = canonicalize_text(item.question);
        auto condition = canonicalize_text(*item.condition);
        if (condition.empty() || question.find(condition) == std::string::npos) {
            violations.push_back(ItemViolation::ModifierMissing);
        }
    }
    if (item.general_answer.has_value() &&
        normalize_answer(item.conditional_answer) == normalize_answer(*item.general_answer)) {
        violations.push_back(ItemViolation::AnswerNotDivergent);
    }
    std::size_t minimum = item.condition.has_value() ? 2 : 1;
    if (item.doc_ids.size() < minimum) {
        violations.push_back(ItemViolation::MissingDocuments);
    }
    return violations;
}

std::vector<BenchmarkItem> load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset: " + path.string());
    std::vector<BenchmarkItem> items;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto row = ordered_json::parse(line, nullptr, false);
        if (row.is_discarded() || !row.is_object()) {
            throw FormatError("dataset row is not a JSON object", line_no);
        }
        BenchmarkItem item;
        item.id = json_field(row, "id", line_no, true);
        item.question = json_field(row, "question", line_no, true);
        item.conditional_answer = json_field(row, "conditional_answer", line_no, true);
        if (item.id.empty() || item.question.empty() || item.conditional_answer.empty()) {
            throw FormatError("id, question and conditional_answer must be non-empty", line_no);
        }
        if (auto value = json_field(row, "general_answer", line_no, false); !value.empty()) {
            item.general_answer = value;
        }
        if (auto value = json_field(row, "condition", line_no, false); !value.empty()) {
            item.condition = value;
        }
        if (auto value = json_field(row, "category", line_no, false); !value.empty()) {
            item.category = value;
        }
        if (auto it = row.find("doc_ids"); it != row.end() && !it->is_null()) {
            if (!it->is_array()) throw FormatError("doc_ids is not an array", line_no);
            for (const auto& doc : *it) {
                if (!doc.is_string()) throw FormatError("doc_ids entry is not a string", line_no);
                item.doc_ids.push_back(doc.get<std::string>());
            }
        }
        items.push_back(std::move(item));
    }
    return items;
}

std::string normalize_answer(std::string_view text) {
    std::string kept;
    kept.reserve(text.size());
    for (unsigned char c : text) {
        if (std::ispunct(c)) continue;
        kept.push_back(static_cast<char>(std::tolower(c)));
    }
    std::string out;
    for (const auto& token : split_whitespace(kept)) {
        if (token == "a" || token == "an" || token == "the") continue;
        if (!out.empty()) out.push_back(' ');
        out += token;
    }
    return out;
}

int exact_match(std::string_view prediction, std::string_view gold) {
    return normalize_answer(prediction) == normalize_answer(gold) ? 1 : 0;
}

double token_f1(std::string_view prediction, std::string_view gold) {
    auto pred = answer_tokens(prediction);
    auto ref = answer_tokens(gold);
    if (pred.empty() && ref.empty()) return 1.0;
    if (pred.empty() || ref.empty()) return 0.0;

    std::unordered_map<std::string, int> budget;
    for (const auto& token : pred) ++budget[token];
    int overlap = 0;
    for (const auto& token : ref) {
        auto it = budget.find(token);
        if (it != budget.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return 0.0;
    double precision = static_cast<double>(overlap) / pred.size();
    double recall = static_cast<double>(overlap) / ref.size();
    return 2.0 * precision * recall / (precision + recall);
}

double gwet_ac1(const std::vector<std::vector<std::string>>& ratings) {
    auto space = make_categories(ratings, nullptr);
    return gwet_generic(ratings, space,
                        [](std::size_t k, std::size_t l) { return k == l ? 1.0 : 0.0; });
}

double gwet_ac2(const std::vector<std::vector<std::string>>& ratings,
                const std::vector<std::string>& ordered_categories) {
    if (ordered_categories.size() < 2) {
        // A one-category ordinal scale cannot disagree.
        check_matrix(ratings);
        auto space = make_categories(ratings, &ordered_categories);
        return gwet_generic(ratings, space, [](std::size_t, std::size_t) { return 1.0; });
    }
    auto space = make_categories(ratings, &ordered_categories);
    double span = static_cast<double>(ordered_categories.size() - 1);
    auto quadratic = [span](std::size_t k, std::size_t l) {
        double d = (static_cast<double>(k) - static_cast<double>(l)) / span;
        return 1.0 - d * d;
    };
    return gwet_generic(ratings, space, quadratic);
}

std::pair<double, double> percent_agreement(const std::vector<std::vector<std::string>>& ratings) {
    check_matrix(ratings);
    const std::size_t n = ratings.size();
    const std::size_t r = ratings.front().size();
    double unanimous = 0.0;
    double pair_sum = 0.0;
    const double pairs = static_cast<double>(r) * (r - 1) / 2.0;
    for (const auto& row : ratings) {
        bool all_equal = std::all_of(row.begin(), row.end(),
                                     [&](const std::string& v) { return v == row.front(); });
        if (all_equal) unanimous += 1.0;
        double agreeing = 0.0;
        for (std::size_t g = 0; g < r; ++g) {
            for (std::size_t h = g + 1; h < r; ++h) {
                if (row[g] == row[h]) agreeing += 1.0;
            }
        }
        pair_sum += agreeing / pairs;
    }
    return {100.0 * unanimous / n, 100.0 * pair_sum / n};
}

RatingsTable load_ratings_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open ratings file: " + path.string());

    auto split_csv = [](const std::string& line) {
        std::vector<std::string> cells;
        std::string cell;
        for (char c : line) {
            if (c == ',') {
                cells.push_back(cell);
                cell.clear();
            } else if (c != '\r') {
                cell.push_back(c);
            }
        }
        cells.push_back(cell);
        return cells;
    };

    std::string line;
    if (!std::getline(in, line)) throw FormatError("ratings file is empty", 1);
    auto header = split_csv(line);
    if (header.size() < 3 || header[0] != "item_id") {
        throw FormatError("ratings header must be item_id,rater_1,...,rater_k", 1);
    }
    for (std::size_t i = 1; i < header.size(); ++i) {
        if (header[i] != "rater_" + std::to_string(i)) {
            throw FormatError("unexpected rater column: " + header[i], 1);
        }
    }

    RatingsTable table;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto cells = split_csv(line);
        if (cells.size() != header.size()) {
            throw FormatError("row width does not match header", line_no);
        }
        table.item_ids.push_back(cells[0]);
        table.ratings.emplace_back(cells.begin() + 1, cells.end());
    }
    return table;
}

std::uint64_t eval_config_hash(const PipelineOptions& options) {
    ordered_json j;
    j["gating"] = options.gating;
    j["k_nodes"] = options.traversal.k_nodes;
    j["k_paths"] = options.ranking.k_paths;
    j["d_max"] = options.traversal.d_max;
    j["tau"] = options.traversal.tau;
    j["max_paths"] = options.traversal.max_paths;
    return fnv1a64(j.dump());
}

std::string eval_report_to_json(const EvalReport& report) {
    ordered_json j;
    j["config"] = {{"gating", report.gating},
                   {"k_paths", report.k_paths},
                   {"k_nodes", report.k_nodes},
                   {"config_hash", to_hex(report.config_hash)}};
    j["aggregate"] = {{"em_percent", report.em_percent},
                      {"f1_percent", report.f1_percent},
                      {"items", report.items.size()}};
    auto items = ordered_json::array();
    for (const auto& item : report.items) {
        items.push_back({{"id", item.id},
                         {"prediction", item.prediction},
                         {"em", item.em},
                         {"f1", item.f1},
                         {"error", item.error}});
    }
    j["items"] = items;
    return j.dump(2);
}

namespace {

/// Runs fn(0..count) on up to `jobs` worker threads; the first exception is
/// rethrown on the caller thread after all workers finish.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    int workers = std::clamp<int>(jobs, 1, static_cast<int>(count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

KnowledgeGraph build_item_graph(const BenchmarkItem& item,
                                const std::map<std::string, std::string>& corpus,
                                TupleExtractor& extractor, const SynonymDictionary& dict,
                                bool materialize_inverse) {
    KnowledgeGraph graph;
    for (const auto& doc_id : item.doc_ids) {
        auto it = corpus.find(doc_id);
        if (it == corpus.end()) throw IoError("document text not found: " + doc_id);
        graph.add_document(doc_id, it->second);
        for (const auto& chunk : chunk_document(doc_id, it->second)) {
            auto outcome = extract_tuples(chunk, extractor);
            for (const auto& tuple : outcome.tuples) {
                auto edge = normalize_tuple(tuple, dict, &chunk);
                std::optional<std::string> inverse;
                if (!tuple.inverse_relation.empty()) inverse = tuple.inverse_relation;
                graph.add_tuple(edge, materialize_inverse, inverse);
            }
        }
    }
    graph.freeze();
    return graph;
}

}  // namespace

std::vector<EvalReport> run_eval(const std::vector<BenchmarkItem>& items,
                                 const std::map<std::string, std::string>& corpus,
                                 const PipelineProviders& providers,
                                 const EvalRunConfig& config) {
    RuleBasedExtractor default_extractor;
    TupleExtractor& extractor =
        config.extractor != nullptr ? *config.extractor : default_extractor;
    SynonymDictionary empty_dict;
    const SynonymDictionary& dict =
        config.dictionary != nullptr ? *config.dictionary : empty_dict;

    // Graphs depend only on the item's documents, so they are shared across
    // sweep configurations.
    std::vector<KnowledgeGraph> graphs(items.size());
    std::vector<std::string> build_errors(items.size());
    parallel_for(items.size(), config.jobs, [&](std::size_t i) {
        try {
            graphs[i] = build_item_graph(items[i], corpus, extractor, dict,
                                         config.materialize_inverse);
        } catch (const Error& e) {
            build_errors[i] = e.what();
        }
    });

    std::vector<PipelineOptions> configurations;
    if (config.sweep_k_paths.empty() && config.sweep_k_nodes.empty()) {
        configurations.push_back(config.options);
    }
    for (int k : config.sweep_k_paths) {
        auto options = config.options;
        options.ranking.k_paths = k;
        configurations.push_back(options);
    }
    for (int k : config.sweep_k_nodes) {
        auto options = config.options;
        options.traversal.k_nodes = k;
        configurations.push_back(options);
    }

    std::vector<EvalReport> reports;
    reports.reserve(configurations.size());
    for (const auto& options : configurations) {
        EvalReport report;
        report.gating = options.gating;
        report.k_paths = options.ranking.k_paths;
        report.k_nodes = options.traversal.k_nodes;
        report.config_hash = eval_config_hash(options);
        report.items.resize(items.size());

        parallel_for(items.size(), config.jobs, [&](std::size_t i) {
            ItemResult result;
            result.id = items[i].id;
            if (!build_errors[i].empty()) {
                result.error = build_errors[i];
            } else {
                try {
                    auto run = answer_question(items[i].question, graphs[i], providers, options);
                    result.prediction = run.result.answer;
                    result.em = exact_match(result.prediction, items[i].conditional_answer);
                    result.f1 = token_f1(result.prediction, items[i].conditional_answer);
                } catch (const Error& e) {
                    result.error = e.what();
                }
            }
            report.items[i] = std::move(result);
        });

        std::sort(report.items.begin(), report.items.end(),
                  [](const ItemResult& a, const ItemResult& b) { return a.id < b.id; });
        if (!report.items.empty()) {
            double em_sum = 0.0;
            double f1_sum = 0.0;
            for (const auto& item : report.items) {
                em_sum += item.em;
                f1_sum += item.f1;
            }
            report.em_percent = round2(100.0 * em_sum / report.items.size());
            report.f1_percent = round2(100.0 * f1_sum / report.items.size());
        }
        reports.push_back(std::move(report));
    }
    return reports;
}

}  // namespace cgr
