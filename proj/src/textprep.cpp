#include "engagelab/textprep.hpp"

#include <algorithm>
#include <cmath>

#include "engagelab/errors.hpp"
#include "engagelab/resources.hpp"

namespace engagelab {

namespace {

bool is_ascii_alnum(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : c; }
char ascii_upper(char c) { return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 32) : c; }

// Steps 1-3 of the cleaning order; shared by both preprocessing paths.
std::string strip_characters(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        if (c == '\\' || c == '"') continue;
        if (c == '\n' || c == '\r' || c == '\t') c = ' ';
        if (is_ascii_alnum(c) || c == '.' || c == ' ') out.push_back(c);
    }
    return out;
}

// Steps 5-6: drop standalone "n" (either case) and collapse whitespace.
std::string drop_n_and_collapse(std::string_view text) {
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto start = text.find_first_not_of(' ', pos);
        if (start == std::string_view::npos) break;
        auto end = text.find(' ', start);
        if (end == std::string_view::npos) end = text.size();
        const auto token = text.substr(start, end - start);
        pos = end;
        if (token == "n" || token == "N") continue;
        if (!out.empty()) out.push_back(' ');
        out.append(token);
    }
    return out;
}

}  // namespace

WordSet parse_word_list(std::string_view text) {
    WordSet words;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        auto line = text.substr(pos, eol - pos);
        pos = eol + 1;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string_view::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        words.emplace(line.substr(first, last - first + 1));
    }
    return words;
}

WordSet load_word_list(const std::filesystem::path& path) {
    return parse_word_list(read_text_file(path));
}

const WordSet& default_stopwords() {
    static const WordSet words = load_word_list(resource_path("stopwords.txt"));
    return words;
}

std::string clean_text(std::string_view raw) {
    auto text = strip_characters(raw);
    std::transform(text.begin(), text.end(), text.begin(), ascii_lower);
    return drop_n_and_collapse(text);
}

std::vector<std::string> tokenize(std::string_view cleaned) {
    std::vector<std::string> tokens;
    std::size_t pos = 0;
    while (pos < cleaned.size()) {
        const auto start = cleaned.find_first_not_of(" \t\r\n", pos);
        if (start == std::string_view::npos) break;
        auto end = cleaned.find_first_of(" \t\r\n", start);
        if (end == std::string_view::npos) end = cleaned.size();
        auto token = cleaned.substr(start, end - start);
        pos = end;
        while (!token.empty() && token.back() == '.') token.remove_suffix(1);
        if (!token.empty()) tokens.emplace_back(token);
    }
    return tokens;
}

TokenDocument remove_stopwords(TokenDocument doc, const WordSet& stopwords) {
    std::erase_if(doc.tokens, [&](const std::string& t) { return stopwords.contains(t); });
    return doc;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

TokenDocument correct_spelling(TokenDocument doc, const WordSet& dictionary) {
    constexpr std::size_t kMaxDistance = 2;
    for (auto& token : doc.tokens) {
        if (dictionary.contains(token)) continue;
        const std::string* best = nullptr;
        std::size_t best_distance = kMaxDistance + 1;
        for (const auto& word : dictionary) {
            const auto len_gap = word.size() > token.size() ? word.size() - token.size()
                                                            : token.size() - word.size();
            if (len_gap >= best_distance) continue;
            const auto d = levenshtein(token, word);
            if (d < best_distance) {
                best_distance = d;
                best = &word;
            }
        }
        if (best) token = *best;
    }
    return doc;
}

std::string preserve_sentence_form(std::string_view raw) {
    auto text = drop_n_and_collapse(strip_characters(raw));
    if (text.empty()) return text;
    for (auto& c : text) {
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) {
            c = ascii_upper(c);
            break;
        }
    }
    const char last = text.back();
    if (last != '.' && last != '!' && last != '?') text.push_back('.');
    return text;
}

TokenDocument preprocess_for_ml(std::string record_id, std::string_view text,
                                const WordSet& stopwords, const PreprocessOptions& options) {
    TokenDocument doc{std::move(record_id), tokenize(clean_text(text))};
    doc = remove_stopwords(std::move(doc), stopwords);
    if (options.correct_spelling && !options.dictionary.empty())
        doc = correct_spelling(std::move(doc), options.dictionary);
    return doc;
}

TfidfModel::TfidfModel(std::vector<std::string> terms, std::vector<Index> document_frequency,
                       Index corpus_size)
    : terms_(std::move(terms)), df_(std::move(document_frequency)), corpus_size_(corpus_size) {
    vocabulary_.reserve(terms_.size());
    for (std::size_t i = 0; i < terms_.size(); ++i)
        vocabulary_.emplace(terms_[i], static_cast<Index>(i));
}

std::optional<TfidfModel::Index> TfidfModel::column(std::string_view token) const {
    auto it = vocabulary_.find(std::string(token));
    if (it == vocabulary_.end()) return std::nullopt;
    return it->second;
}

TfidfModel::Index TfidfModel::document_frequency(std::string_view token) const {
    auto c = column(token);
    return c ? df_[static_cast<std::size_t>(*c)] : 0;
}

double TfidfModel::idf(Index column) const {
    const auto df = static_cast<double>(df_[static_cast<std::size_t>(column)]);
    return std::log((1.0 + static_cast<double>(corpus_size_)) / (1.0 + df)) + 1.0;
}

TfidfModel tfidf_fit(std::span<const TokenDocument> docs) {
    if (docs.empty()) throw EmptyCorpus("tfidf_fit: no documents");
    std::vector<std::string> terms;
    std::vector<TfidfModel::Index> df;
    std::unordered_map<std::string, std::size_t> column;
    std::vector<std::size_t> last_doc;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        for (const auto& t : docs[d].tokens) {
            auto [it, inserted] = column.try_emplace(t, terms.size());
            if (inserted) {
                terms.push_back(t);
                df.push_back(0);
                last_doc.push_back(SIZE_MAX);
            }
            if (last_doc[it->second] != d) {
                last_doc[it->second] = d;
                ++df[it->second];
            }
        }
    }
    return TfidfModel(std::move(terms), std::move(df), static_cast<TfidfModel::Index>(docs.size()));
}

FeatureVector tfidf_transform(const TfidfModel& model, const TokenDocument& doc) {
    FeatureVector fv{doc.record_id, Eigen::SparseVector<double>(model.dim())};
    for (const auto& t : doc.tokens)
        if (auto c = model.column(t)) fv.entries.coeffRef(*c) += 1.0;
    for (Eigen::SparseVector<double>::InnerIterator it(fv.entries); it; ++it)
        it.valueRef() *= model.idf(it.index());
    const double norm = fv.entries.norm();
    if (norm > 0.0) fv.entries /= norm;
    return fv;
}

std::vector<FeatureVector> tfidf_transform(const TfidfModel& model,
                                           std::span<const TokenDocument> docs) {
    std::vector<FeatureVector> out;
    out.reserve(docs.size());
    for (const auto& d : docs) out.push_back(tfidf_transform(model, d));
    return out;
}

}  // namespace engagelab
