#include "cgr/extraction.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <optional>

#include "cgr/text.hpp"

namespace cgr {

std::vector<DocumentChunk> chunk_document(const std::string& doc_id, const std::string& text,
                                          std::size_t max_chunk_chars) {
    if (max_chunk_chars < 200) {
        throw ConfigError("max_chunk_chars must be at least 200");
    }
    if (canonicalize_text(text).empty()) return {};

    std::vector<DocumentChunk> chunks;
    auto emit = [&](std::size_t start, std::size_t length) {
        if (length == 0) return;
        DocumentChunk chunk;
        chunk.doc_id = doc_id;
        chunk.chunk_index = chunks.size();
        chunk.char_offset = start;
        chunk.text = text.substr(start, length);
        chunks.push_back(std::move(chunk));
    };

    std::size_t open_start = 0;  // start of the chunk being accumulated
    std::size_t open_len = 0;
    for (const auto& span : split_sentences(text)) {
        std::size_t remaining = span.length;
        std::size_t pos = span.start;
        // Oversized sentences are hard-cut; each piece becomes its own chunk.
        while (remaining > max_chunk_chars) {
            emit(open_start, open_len);
            std::size_t take = max_chunk_chars;
            emit(pos, take);
            pos += take;
            remaining -= take;
            open_start = pos;
            open_len = 0;
        }
        if (open_len + remaining > max_chunk_chars) {
            emit(open_start, open_len);
            open_start = pos;
            open_len = 0;
        }
        open_len += remaining;
    }
    emit(open_start, open_len);
    return chunks;
}

SynonymDictionary SynonymDictionary::load_tsv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open synonym dictionary '" + path.string() + "'");
    SynonymDictionary dict;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw FormatError("dictionary row lacks a tab separator", line_no);
        }
        std::string surface = canonicalize_text(line.substr(0, tab));
        std::string canonical = canonicalize_text(line.substr(tab + 1));
        if (surface.empty() || canonical.empty()) {
            throw FormatError("dictionary row has an empty field", line_no);
        }
        dict.add(surface, canonical);
    }
    return dict;
}

void SynonymDictionary::add(std::string_view surface, std::string_view canonical) {
    map_[canonicalize_text(surface)] = canonicalize_text(canonical);
}

EntityId SynonymDictionary::apply(const EntityId& entity) const {
    auto it = map_.find(entity.value());
    if (it == map_.end()) return entity;
    return EntityId::canonical(it->second);
}

// ---------------------------------------------------------------------------
// Rule-based extraction grammar
// ---------------------------------------------------------------------------

namespace {

std::string lower_copy(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

/// Case-insensitive find of `needle` (already lowercase) in `haystack`.
std::size_t find_ci(const std::string& haystack_lower, std::string_view needle,
                    std::size_t from = 0) {
    return haystack_lower.find(needle, from);
}

bool starts_with_word(const std::string& lower, std::string_view word) {
    if (!lower.starts_with(word)) return false;
    return lower.size() == word.size() ||
           !std::isalnum(static_cast<unsigned char>(lower[word.size()]));
}

/// Trims punctuation and leading articles/adverbs; drops parentheticals.
std::string clean_np(std::string_view raw) {
    std::string s = trim(raw);
    // Drop "(...)" asides such as "(UTI)".
    std::string no_parens;
    int depth = 0;
    for (char c : s) {
        if (c == '(') {
            ++depth;
            continue;
        }
        if (c == ')') {
            if (depth > 0) --depth;
            continue;
        }
        if (depth == 0) no_parens.push_back(c);
    }
    s = trim(no_parens);
    while (!s.empty() && (s.back() == ',' || s.back() == '.' || s.back() == ';' ||
                          s.back() == ':' || s.back() == '!' || s.back() == '?')) {
        s.pop_back();
        s = trim(s);
    }
    bool stripped = true;
    while (stripped) {
        stripped = false;
        std::string lower = lower_copy(s);
        for (std::string_view art : {"a ", "an ", "the "}) {
            if (lower.starts_with(art)) {
                s = trim(s.substr(art.size()));
                stripped = true;
                break;
            }
        }
    }
    return s;
}

/// "less than 3" -> "< 3", "greater/more than 5" -> "> 5".
std::string rewrite_comparatives(const std::string& s) {
    std::string lower = lower_copy(s);
    std::string out = s;
    auto replace_all = [&](std::string_view phrase, std::string_view sym) {
        std::size_t pos = 0;
        while ((pos = find_ci(lower, phrase, pos)) != std::string::npos) {
            out.replace(pos, phrase.size(), sym);
            lower.replace(pos, phrase.size(), sym);
            pos += sym.size();
        }
    };
    replace_all("less than", "<");
    replace_all("fewer than", "<");
    replace_all("greater than", ">");
    replace_all("more than", ">");
    return out;
}

/// Removes temporal tails that add no content.
std::string cut_temporal_tail(const std::string& s) {
    std::string lower = lower_copy(s);
    for (std::string_view tail : {" in the past", " previously", " in the future"}) {
        if (lower.ends_with(tail)) return trim(s.substr(0, s.size() - tail.size()));
    }
    return s;
}

std::string clean_condition(std::string_view raw) {
    std::string s = clean_np(raw);
    s = rewrite_comparatives(s);
    s = cut_temporal_tail(s);
    return s;
}

/// Splits a qualifier phrase on "who had/have never been <X>" into the base
/// condition plus a negated "not <X>" condition.
std::vector<std::string> expand_who_clause(const std::string& phrase) {
    std::string lower = lower_copy(phrase);
    for (std::string_view marker : {" who had never been ", " who have never been ",
                                    " who were never ", " who was never "}) {
        auto pos = find_ci(lower, marker);
        if (pos == std::string::npos) continue;
        std::string base = clean_condition(phrase.substr(0, pos));
        std::string negated =
            "not " + clean_condition(phrase.substr(pos + marker.size()));
        std::vector<std::string> out;
        if (!base.empty()) out.push_back(base);
        if (negated != "not ") out.push_back(negated);
        return out;
    }
    std::string cleaned = clean_condition(phrase);
    if (cleaned.empty()) return {};
    return {cleaned};
}

struct ObjectParts {
    std::string object;
    std::vector<std::string> conditions;
};

/// Cuts an object capture at clause-level tails and lifts prepositional
/// qualifiers into conditions. "except in X" / "unless X" / "but not in X"
/// become negated conditions. Qualifier lifting runs before tail cuts so
/// that "to" inside a lifted phrase ("exposed to X") survives intact.
ObjectParts lift_object_qualifiers(std::string_view raw, bool lift_prepositions) {
    ObjectParts parts;
    std::string s = trim(raw);
    std::string lower = lower_copy(s);

    for (std::string_view cue : {" except in ", " except during ", " unless ", " but not in ",
                                 " but not during "}) {
        auto pos = find_ci(lower, cue);
        if (pos != std::string::npos) {
            std::string negated = clean_condition(s.substr(pos + cue.size()));
            if (!negated.empty()) parts.conditions.push_back("not " + negated);
            s = trim(s.substr(0, pos));
            lower = lower_copy(s);
        }
    }
    if (lift_prepositions) {
        for (std::string_view prep : {" in ", " during ", " for ", " among "}) {
            auto pos = find_ci(lower, prep);
            if (pos == std::string::npos) continue;
            std::string qualifier = s.substr(pos + prep.size());
            s = trim(s.substr(0, pos));
            lower = lower_copy(s);
            for (auto& c : expand_who_clause(qualifier)) {
                parts.conditions.push_back(std::move(c));
            }
            break;  // one qualifier per object capture
        }
    }
    for (std::string_view tail : {" to ", " due to ", " owing to ", " as the only ", " as "}) {
        auto pos = find_ci(lower, tail);
        if (pos != std::string::npos) {
            s = trim(s.substr(0, pos));
            lower = lower_copy(s);
        }
    }
    parts.object = clean_np(s);
    return parts;
}

/// Splits "A, B, and C" / "A, B, or C" style enumerations. Separators are
/// matched earliest-first; at equal positions the longer one wins so that
/// ", and " beats ", ".
std::vector<std::string> split_list(const std::string& raw) {
    static const std::array<std::string_view, 3> kSeps = {", and ", ", or ", ", "};
    std::vector<std::string> items;
    std::string rest = raw;
    while (true) {
        std::string lower = lower_copy(rest);
        std::size_t best_pos = std::string::npos;
        std::size_t best_len = 0;
        for (auto sep : kSeps) {
            auto pos = find_ci(lower, sep);
            if (pos == std::string::npos) continue;
            if (pos < best_pos || (pos == best_pos && sep.size() > best_len)) {
                best_pos = pos;
                best_len = sep.size();
            }
        }
        if (best_pos == std::string::npos) break;
        items.push_back(trim(rest.substr(0, best_pos)));
        rest = trim(rest.substr(best_pos + best_len));
    }
    // A final two-item split ("A or B") only when no comma list was found.
    if (items.empty()) {
        std::string lower = lower_copy(rest);
        for (std::string_view sep : {" or ", " and "}) {
            auto pos = find_ci(lower, sep);
            if (pos != std::string::npos) {
                items.push_back(trim(rest.substr(0, pos)));
                rest = trim(rest.substr(pos + sep.size()));
                break;
            }
        }
    }
    if (!trim(rest).empty()) items.push_back(trim(rest));
    return items;
}

/// Distributes the head noun over "A and B" subjects:
/// "L-type and T-type calcium channels" -> {"L-type calcium channels",
/// "T-type calcium channels"}; "aspirin and ibuprofen" -> both unchanged.
std::vector<std::string> split_subject_conjunction(const std::string& subject) {
    std::string lower = lower_copy(subject);
    auto pos = find_ci(lower, " and ");
    if (pos == std::string::npos) return {subject};
    std::string first = trim(subject.substr(0, pos));
    std::string second = trim(subject.substr(pos + 5));
    if (first.empty() || second.empty()) return {subject};
    auto second_tokens = split_whitespace(second);
    if (second_tokens.size() > 1) {
        std::string head;
        for (std::size_t i = 1; i < second_tokens.size(); ++i) {
            head += " " + second_tokens[i];
        }
        first += head;
    }
    return {first, second};
}

struct ClauseTuple {
    std::string subject;
    std::string relation;
    std::string inverse;
    std::string object;
    std::vector<std::string> conditions;
};

const std::array<std::string_view, 11> kAuxiliaries = {
    "is", "are", "was", "were", "may be", "can be", "should be",
    "has been", "have been", "had been", "will be"};

/// Finds " <aux> [both] <participle_frame> " and returns the span start and
/// the offset where the object begins. Returns npos when absent.
std::pair<std::size_t, std::size_t> find_passive(const std::string& lower,
                                                 std::string_view frame_body) {
    for (auto aux : kAuxiliaries) {
        for (std::string_view both : {"", "both "}) {
            std::string marker = " " + std::string(aux) + " " + std::string(both) +
                                 std::string(frame_body) + " ";
            auto pos = find_ci(lower, marker);
            if (pos != std::string::npos) return {pos, pos + marker.size()};
        }
    }
    return {std::string::npos, 0};
}

std::pair<std::size_t, std::size_t> find_active(const std::string& lower,
                                                std::string_view verb_marker) {
    std::string marker = " " + std::string(verb_marker) + " ";
    auto pos = find_ci(lower, marker);
    if (pos != std::string::npos) return {pos, pos + marker.size()};
    // Clause-initial verb (subject elided): "may cause partial ...".
    std::string initial = std::string(verb_marker) + " ";
    if (lower.starts_with(initial)) return {0, initial.size()};
    return {std::string::npos, 0};
}

struct FrameSpec {
    enum class Voice { Passive, Active } voice;
    std::string_view marker;    // participle body or active verb
    std::string_view relation;
    std::string_view inverse;
    bool lift_prepositions;
};

// Order matters: longer/more specific frames first.
const std::array<FrameSpec, 22> kFrames = {{
    {FrameSpec::Voice::Passive, "contraindicated in", "contraindicated_in",
     "has_contraindication", false},
    {FrameSpec::Voice::Passive, "contraindicated during", "contraindicated_in",
     "has_contraindication", false},
    {FrameSpec::Voice::Passive, "recommended for", "recommended_for", "has_recommendation", true},
    {FrameSpec::Voice::Passive, "treated with", "treated_with", "treats", true},
    {FrameSpec::Voice::Passive, "treated by", "treated_by", "treats", true},
    {FrameSpec::Voice::Passive, "associated with", "associated_with", "associated_with", true},
    {FrameSpec::Voice::Passive, "blocked by", "blocked_by", "blocks", true},
    {FrameSpec::Voice::Passive, "preferred in", "preferred_in", "has_preferred_option", false},
    {FrameSpec::Voice::Passive, "superior to", "superior_to", "inferior_to", true},
    {FrameSpec::Voice::Passive, "proportional to", "proportional_to", "proportional_to", true},
    {FrameSpec::Voice::Passive, "diagnosed by", "diagnosed_by", "diagnoses", true},
    {FrameSpec::Voice::Passive, "diagnosed with", "diagnosed_by", "diagnoses", true},
    {FrameSpec::Voice::Passive, "evaluated with", "evaluated_with", "evaluates", true},
    {FrameSpec::Voice::Active, "recommends", "recommends", "recommended_by", true},
    {FrameSpec::Voice::Active, "treats", "treats", "treated_by", true},
    {FrameSpec::Voice::Active, "presents with", "presents_with", "presentation_of", false},
    {FrameSpec::Voice::Active, "present with", "presents_with", "presentation_of", false},
    {FrameSpec::Voice::Active, "may cause", "causes", "caused_by", true},
    {FrameSpec::Voice::Active, "can cause", "causes", "caused_by", true},
    {FrameSpec::Voice::Active, "causes", "causes", "caused_by", true},
    {FrameSpec::Voice::Active, "increases", "increases", "increased_by", true},
    {FrameSpec::Voice::Active, "reduces", "reduces", "reduced_by", true},
}};

bool is_pronoun_subject(const std::string& cleaned_lower) {
    return cleaned_lower.empty() || cleaned_lower == "it" || cleaned_lower == "this" ||
           cleaned_lower == "they" || cleaned_lower == "which";
}

/// True for noun phrases whose head names a patient population rather than a
/// clinical entity ("postmenopausal women", "elderly patients").
bool is_population_np(const std::string& np) {
    auto tokens = split_whitespace(lower_copy(np));
    if (tokens.empty()) return false;
    static const std::array<std::string_view, 16> kHeads = {
        "women", "woman", "men", "man", "patients", "patient", "children", "child",
        "adults", "adult", "infants", "infant", "elderly", "males", "females", "people"};
    const std::string& head = tokens.back();
    return std::find(kHeads.begin(), kHeads.end(), head) != kHeads.end();
}

/// Leading adverbs and connectives stripped before frame matching.
std::string strip_leading_adverbs(const std::string& clause) {
    std::string s = trim(clause);
    bool stripped = true;
    while (stripped) {
        stripped = false;
        std::string lower = lower_copy(s);
        for (std::string_view adv :
             {"thus", "therefore", "however", "also", "then", "additionally", "moreover",
              "finally", "typically", "generally", "and", "but"}) {
            if (starts_with_word(lower, adv)) {
                s = trim(s.substr(adv.size()));
                if (!s.empty() && s.front() == ',') s = trim(s.substr(1));
                stripped = true;
                break;
            }
        }
    }
    return s;
}

struct LeadingConditions {
    std::vector<std::string> conditions;
    std::string body;
};

/// "In pediatric patients, ultrasound is ..." -> condition "pediatric
/// patients", body "ultrasound is ...".
LeadingConditions lift_leading_conditions(const std::string& sentence) {
    LeadingConditions out;
    out.body = trim(sentence);
    std::string lower = lower_copy(out.body);
    for (std::string_view prep : {"in ", "during ", "for ", "among ", "with "}) {
        if (!lower.starts_with(prep)) continue;
        auto comma = out.body.find(',');
        if (comma == std::string::npos) break;
        std::string phrase = out.body.substr(prep.size(), comma - prep.size());
        std::string cond = clean_condition(phrase);
        if (!cond.empty()) {
            out.conditions.push_back(cond);
            out.body = trim(out.body.substr(comma + 1));
        }
        break;
    }
    return out;
}

struct Clause {
    std::string text;
    bool relative = false;  // introduced by ", which" (inherits conditions)
};

std::vector<Clause> split_clauses(const std::string& body) {
    struct Sep {
        std::string_view text;
        bool relative;
        bool drop_left;  // "found that": keep only the reported content
    };
    static const std::array<Sep, 9> kSeps = {{
        {" found that ", false, true},
        {" showed that ", false, true},
        {" reported that ", false, true},
        {", and because ", false, false},
        {" and because ", false, false},
        {", because ", false, false},
        {" because ", false, false},
        {", which ", true, false},
        {"; ", false, false},
    }};
    std::vector<Clause> clauses;
    std::string rest = body;
    bool rest_relative = false;
    while (true) {
        std::string lower = lower_copy(rest);
        std::size_t best_pos = std::string::npos;
        const Sep* best = nullptr;
        for (const auto& sep : kSeps) {
            auto pos = find_ci(lower, sep.text);
            if (pos != std::string::npos && pos < best_pos) {
                best_pos = pos;
                best = &sep;
            }
        }
        if (best == nullptr) break;
        std::string left = trim(rest.substr(0, best_pos));
        if (!best->drop_left && !left.empty()) {
            clauses.push_back({left, rest_relative});
        }
        rest = trim(rest.substr(best_pos + best->text.size()));
        rest_relative = best->relative;
    }
    if (!trim(rest).empty()) clauses.push_back({trim(rest), rest_relative});
    return clauses;
}

/// Subject NP of the first sentence, used as the fallback topic for
/// subjectless frames ("Risk factors include ...").
std::string extract_topic(const std::string& sentence) {
    std::string lower = lower_copy(sentence);
    std::size_t cut = std::string::npos;
    for (std::string_view verb : {" is ", " are ", " was ", " were ", " may ", " can ",
                                  " should ", " include ", " includes ", " has ", " have "}) {
        auto pos = find_ci(lower, verb);
        if (pos != std::string::npos && pos < cut) cut = pos;
    }
    if (cut == std::string::npos) return "";
    return clean_np(sentence.substr(0, cut));
}

class ClauseMatcher {
public:
    ClauseMatcher(std::string topic) : topic_(std::move(topic)) {}

    std::vector<ClauseTuple> match(const std::string& clause_raw,
                                   const std::string& primary_subject) {
        std::string clause = strip_leading_adverbs(clause_raw);
        std::string lower = lower_copy(clause);

        if (auto tuples = match_should_not_be_taken(clause, lower, primary_subject);
            !tuples.empty()) {
            return tuples;
        }
        if (auto tuples = match_include_list(clause, lower); !tuples.empty()) {
            return tuples;
        }
        if (auto tuples = match_diagnosis(clause, lower); !tuples.empty()) {
            return tuples;
        }
        for (const auto& frame : kFrames) {
            auto [pos, object_start] = frame.voice == FrameSpec::Voice::Passive
                                           ? find_passive(lower, frame.marker)
                                           : find_active(lower, frame.marker);
            if (pos == std::string::npos) continue;
            return build_tuples(clause, pos, object_start, frame, primary_subject);
        }
        if (auto tuples = match_preferred_np(clause, lower, primary_subject); !tuples.empty()) {
            return tuples;
        }
        return {};
    }

private:
    std::vector<ClauseTuple> build_tuples(const std::string& clause, std::size_t marker_pos,
                                          std::size_t object_start, const FrameSpec& frame,
                                          const std::string& primary_subject) {
        auto parts = lift_object_qualifiers(clause.substr(object_start),
                                            frame.lift_prepositions);
        if (parts.object.empty()) return {};

        SubjectParts subject = resolve_subject(clause.substr(0, marker_pos), primary_subject);
        if (subject.name.empty()) return {};
        // Treatment statements about a population ("Postmenopausal women may
        // be treated with X") are really about the chunk topic, with the
        // population as the condition.
        if (frame.voice == FrameSpec::Voice::Passive && is_population_np(subject.name) &&
            !topic_.empty() && lower_copy(topic_) != lower_copy(subject.name)) {
            subject.conditions.insert(subject.conditions.begin(), clean_condition(subject.name));
            subject.name = topic_;
        }

        std::vector<ClauseTuple> out;
        for (const auto& subj : split_subject_conjunction(subject.name)) {
            ClauseTuple t;
            t.subject = subj;
            t.relation = std::string(frame.relation);
            t.inverse = std::string(frame.inverse);
            t.object = parts.object;
            t.conditions = subject.conditions;
            t.conditions.insert(t.conditions.end(), parts.conditions.begin(),
                                parts.conditions.end());
            out.push_back(std::move(t));
        }
        return out;
    }

    struct SubjectParts {
        std::string name;
        std::vector<std::string> conditions;
    };

    /// Cleans a subject capture; resolves pronouns to the clause chain's
    /// primary subject; lifts "with X" / "in X" subject qualifiers.
    SubjectParts resolve_subject(const std::string& raw, const std::string& primary_subject) {
        SubjectParts parts;
        std::string s = trim(raw);
        std::string lower = lower_copy(s);

        if (starts_with_word(lower, "its use") || starts_with_word(lower, "it") ||
            starts_with_word(lower, "this") || starts_with_word(lower, "they")) {
            std::size_t skip = starts_with_word(lower, "its use") ? 7 : 0;
            if (skip == 0) {
                skip = lower.starts_with("this") ? 4 : (lower.starts_with("they") ? 4 : 2);
            }
            std::string remainder = trim(s.substr(std::min(skip, s.size())));
            parts.name = primary_subject.empty() ? topic_ : primary_subject;
            collect_subject_qualifiers(remainder, parts);
            return parts;
        }

        for (std::string_view prep : {" with ", " in "}) {
            auto pos = find_ci(lower, prep);
            if (pos != std::string::npos) {
                std::string qualifier = clean_condition(s.substr(pos + prep.size()));
                if (!qualifier.empty()) parts.conditions.push_back(qualifier);
                s = trim(s.substr(0, pos));
                lower = lower_copy(s);
                break;
            }
        }
        std::string cleaned = clean_np(s);
        if (is_pronoun_subject(lower_copy(cleaned))) {
            parts.name = primary_subject.empty() ? topic_ : primary_subject;
        } else {
            parts.name = cleaned;
        }
        return parts;
    }

    void collect_subject_qualifiers(const std::string& remainder, SubjectParts& parts) {
        if (remainder.empty()) return;
        std::string lower = lower_copy(remainder);
        for (std::string_view prep : {"in ", "during ", "for ", "with "}) {
            if (lower.starts_with(prep)) {
                std::string cond = clean_condition(remainder.substr(prep.size()));
                if (!cond.empty()) parts.conditions.push_back(cond);
                return;
            }
        }
    }

    /// "<X> should not be taken by <P> [with <Q>]" -> contraindication.
    std::vector<ClauseTuple> match_should_not_be_taken(const std::string& clause,
                                                       const std::string& lower,
                                                       const std::string& primary_subject) {
        static const std::array<std::string_view, 4> kMarkers = {
            " should not be taken by ", " should not be used in ",
            " should not be given to ", " must not be taken by "};
        for (auto marker : kMarkers) {
            auto pos = find_ci(lower, marker);
            if (pos == std::string::npos) continue;
            SubjectParts subject = resolve_subject(clause.substr(0, pos), primary_subject);
            if (subject.name.empty()) return {};
            std::string rest = clause.substr(pos + marker.size());
            std::string rest_lower = lower_copy(rest);
            ClauseTuple t;
            t.subject = subject.name;
            t.relation = "contraindicated_in";
            t.inverse = "has_contraindication";
            t.conditions = subject.conditions;
            auto with_pos = find_ci(rest_lower, " with ");
            if (with_pos != std::string::npos) {
                std::string person = clean_condition(rest.substr(0, with_pos));
                auto object = lift_object_qualifiers(rest.substr(with_pos + 6), false);
                if (!person.empty()) t.conditions.push_back(person);
                t.object = object.object;
            } else {
                auto object = lift_object_qualifiers(rest, false);
                t.object = object.object;
            }
            if (t.object.empty()) return {};
            return {t};
        }
        return {};
    }

    /// "Risk factors include A in X, B in Y" and "presentations ... include
    /// A, B, or C". The subject collapses to the document topic.
    std::vector<ClauseTuple> match_include_list(const std::string& clause,
                                                const std::string& lower) {
        auto pos = find_ci(lower, " include ");
        std::size_t object_start;
        if (pos != std::string::npos) {
            object_start = pos + 9;
        } else if (lower.starts_with("include ")) {
            pos = 0;
            object_start = 8;
        } else {
            return {};
        }
        std::string head_lower = lower.substr(0, pos);
        std::string relation, inverse;
        bool lift = false;
        if (head_lower.find("risk factor") != std::string::npos) {
            relation = "risk_factor";
            inverse = "risk_factor_for";
            lift = true;
        } else if (head_lower.find("presentation") != std::string::npos ||
                   head_lower.find("symptom") != std::string::npos) {
            relation = "presents_with";
            inverse = "presentation_of";
        } else {
            return {};
        }
        if (topic_.empty()) return {};
        std::vector<ClauseTuple> out;
        for (const auto& item : split_list(clause.substr(object_start))) {
            auto parts = lift_object_qualifiers(item, lift);
            if (parts.object.empty()) continue;
            ClauseTuple t;
            t.subject = topic_;
            t.relation = relation;
            t.inverse = inverse;
            t.object = parts.object;
            t.conditions = parts.conditions;
            out.push_back(std::move(t));
        }
        return out;
    }

    /// "<S> diagnosis can be made from <O>" (subject may collapse to topic).
    std::vector<ClauseTuple> match_diagnosis(const std::string& clause,
                                             const std::string& lower) {
        for (std::string_view body :
             {"diagnosis can be made from ", "diagnosis can be made by ",
              "diagnosis is made from ", "diagnosis is made by "}) {
            std::size_t pos;
            std::size_t object_start;
            if (lower.starts_with(body)) {
                pos = 0;
                object_start = body.size();
            } else {
                std::string marker = " " + std::string(body);
                pos = find_ci(lower, marker);
                if (pos == std::string::npos) continue;
                object_start = pos + marker.size();
            }
            std::string subject = clean_np(clause.substr(0, pos));
            if (subject.empty() || lower_copy(subject) == "diagnosis") subject = topic_;
            if (subject.empty()) return {};
            auto parts = lift_object_qualifiers(clause.substr(object_start), true);
            if (parts.object.empty()) return {};
            ClauseTuple t;
            t.subject = subject;
            t.relation = "diagnosed_by";
            t.inverse = "diagnoses";
            t.object = parts.object;
            t.conditions = parts.conditions;
            return {t};
        }
        return {};
    }

    /// "<S> is the preferred <NP>" -> (S, preferred_in, NP).
    std::vector<ClauseTuple> match_preferred_np(const std::string& clause,
                                                const std::string& lower,
                                                const std::string& primary_subject) {
        for (auto aux : kAuxiliaries) {
            std::string marker = " " + std::string(aux) + " the preferred ";
            auto pos = find_ci(lower, marker);
            if (pos == std::string::npos) continue;
            SubjectParts subject = resolve_subject(clause.substr(0, pos), primary_subject);
            if (subject.name.empty()) return {};
            auto parts = lift_object_qualifiers(clause.substr(pos + marker.size()), true);
            if (parts.object.empty()) return {};
            ClauseTuple t;
            t.subject = subject.name;
            t.relation = "preferred_in";
            t.inverse = "has_preferred_option";
            t.object = parts.object;
            t.conditions = subject.conditions;
            t.conditions.insert(t.conditions.end(), parts.conditions.begin(),
                                parts.conditions.end());
            return {t};
        }
        return {};
    }

    std::string topic_;
};

}  // namespace

std::vector<RawTuple> RuleBasedExtractor::extract(const DocumentChunk& chunk) {
    std::vector<RawTuple> tuples;
    std::string topic;

    for (const auto& span : split_sentences(chunk.text)) {
        std::string sentence = trim(std::string_view(chunk.text).substr(span.start, span.length));
        if (sentence.empty()) continue;
        if (topic.empty()) topic = extract_topic(sentence);

        auto leading = lift_leading_conditions(sentence);
        ClauseMatcher matcher(topic);
        std::string primary_subject;
        std::vector<std::string> prev_clause_conditions;

        for (const auto& clause : split_clauses(leading.body)) {
            auto matched = matcher.match(clause.text, primary_subject);
            std::vector<std::string> emitted_conditions;
            for (auto& m : matched) {
                RawTuple t;
                t.entity1 = m.subject;
                t.relation = m.relation;
                t.inverse_relation = m.inverse;
                t.entity2 = m.object;
                t.conditions = leading.conditions;
                if (clause.relative) {
                    // Relative clauses ("..., which may cause X") inherit the
                    // qualifiers of the clause they attach to.
                    t.conditions.insert(t.conditions.end(), prev_clause_conditions.begin(),
                                        prev_clause_conditions.end());
                }
                t.conditions.insert(t.conditions.end(), m.conditions.begin(), m.conditions.end());
                emitted_conditions = m.conditions;
                t.doc_id = chunk.doc_id;
                t.chunk_index = chunk.chunk_index;
                if (primary_subject.empty()) primary_subject = m.subject;
                tuples.push_back(std::move(t));
            }
            if (!matched.empty()) prev_clause_conditions = emitted_conditions;
        }
    }
    return tuples;
}

std::vector<RawTuple> rule_based_extract(const DocumentChunk& chunk) {
    return RuleBasedExtractor{}.extract(chunk);
}

ExtractionOutcome extract_tuples(const DocumentChunk& chunk, TupleExtractor& extractor) {
    ExtractionOutcome outcome;
    for (auto& tuple : extractor.extract(chunk)) {
        bool valid = !canonicalize_text(tuple.entity1).empty() &&
                     !canonicalize_text(tuple.entity2).empty() &&
                     !snake_case(tuple.relation).empty();
        for (const auto& c : tuple.conditions) {
            if (ConditionLabel::parse(c).text().empty()) {
                valid = false;
                break;
            }
        }
        if (!valid) {
            ++outcome.dropped;
            continue;
        }
        tuple.doc_id = chunk.doc_id;
        tuple.chunk_index = chunk.chunk_index;
        outcome.tuples.push_back(std::move(tuple));
    }
    return outcome;
}

EdgeRecord normalize_tuple(const RawTuple& tuple, const SynonymDictionary& dict,
                           const DocumentChunk* chunk) {
    EntityId source = dict.apply(canonicalize_entity(tuple.entity1));
    EntityId target = dict.apply(canonicalize_entity(tuple.entity2));

    std::vector<ConditionLabel> conditions;
    for (const auto& raw : tuple.conditions) {
        auto label = ConditionLabel::parse(raw);
        if (!label.text().empty()) conditions.push_back(std::move(label));
    }

    std::vector<EvidenceSnippet> snippets;
    if (chunk != nullptr && !chunk->text.empty() && !tuple.doc_id.empty()) {
        EvidenceSnippet snippet;
        snippet.doc_id = tuple.doc_id;
        std::string lower_text = lower_copy(chunk->text);
        std::string e1 = lower_copy(tuple.entity1);
        std::string e2 = lower_copy(tuple.entity2);
        bool found = false;
        for (const auto& span : split_sentences(chunk->text)) {
            std::string sentence_lower = lower_text.substr(span.start, span.length);
            if (!e1.empty() && !e2.empty() && sentence_lower.find(e1) != std::string::npos &&
                sentence_lower.find(e2) != std::string::npos) {
                snippet.text = chunk->text.substr(span.start, span.length);
                snippet.char_span = {chunk->char_offset + span.start,
                                     chunk->char_offset + span.start + span.length};
                found = true;
                break;
            }
        }
        if (!found) {
            snippet.text = chunk->text;
            snippet.char_span = {chunk->char_offset, chunk->char_offset + chunk->text.size()};
        }
        snippets.push_back(std::move(snippet));
    }

    return make_edge(source, tuple.relation, target, std::move(conditions), std::move(snippets));
}

}  // namespace cgr
