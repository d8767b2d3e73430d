#pragma once

#include <Eigen/SparseCore>

#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace engagelab {

/// Tokens of one response after cleaning.
struct TokenDocument {
    std::string record_id;
    std::vector<std::string> tokens;

    bool operator==(const TokenDocument&) const = default;
};

/// Ordered so that iteration doubles as the lexicographic tie-break order.
using WordSet = std::set<std::string, std::less<>>;

/// One word per line, `#` starts a comment, blank lines ignored.
WordSet parse_word_list(std::string_view text);
WordSet load_word_list(const std::filesystem::path& path);

/// The shipped stop-word list (resources/stopwords.txt), loaded once.
const WordSet& default_stopwords();

/// ML cleaning path. Steps, in order: strip backslashes and double quotes;
/// newlines (and CR/tab) to spaces; drop everything outside [A-Za-z0-9. ];
/// lowercase; drop the standalone token "n"; collapse whitespace.
std::string clean_text(std::string_view raw);

/// Whitespace split of cleaned text; trailing periods stripped, empties dropped.
std::vector<std::string> tokenize(std::string_view cleaned);

TokenDocument remove_stopwords(TokenDocument doc, const WordSet& stopwords);

std::size_t levenshtein(std::string_view a, std::string_view b);

/// Replaces each out-of-dictionary token by the closest dictionary word within
/// edit distance 2 (ties go to the lexicographically smallest word).
TokenDocument correct_spelling(TokenDocument doc, const WordSet& dictionary);

/// LLM path: same character cleaning as clean_text but case is kept, the first
/// letter is capitalised and a period is appended when the text lacks
/// terminal punctuation. Empty input yields an empty string.
std::string preserve_sentence_form(std::string_view raw);

struct PreprocessOptions {
    bool correct_spelling = false;
    WordSet dictionary;
};

/// clean_text -> tokenize -> remove_stopwords [-> correct_spelling].
TokenDocument preprocess_for_ml(std::string record_id, std::string_view text,
                                const WordSet& stopwords, const PreprocessOptions& options = {});

/// Sparse TF-IDF row; nonzero vectors have unit Euclidean norm.
struct FeatureVector {
    std::string record_id;
    Eigen::SparseVector<double> entries;
};

class TfidfModel {
public:
    using Index = Eigen::Index;

    TfidfModel() = default;
    TfidfModel(std::vector<std::string> terms, std::vector<Index> document_frequency,
               Index corpus_size);

    Index dim() const noexcept { return static_cast<Index>(terms_.size()); }
    Index corpus_size() const noexcept { return corpus_size_; }
    const std::vector<std::string>& terms() const noexcept { return terms_; }
    const std::vector<Index>& document_frequency() const noexcept { return df_; }

    std::optional<Index> column(std::string_view token) const;
    Index document_frequency(std::string_view token) const;

    /// Smoothed idf: ln((1 + N) / (1 + df)) + 1.
    double idf(Index column) const;

    bool operator==(const TfidfModel& other) const {
        return terms_ == other.terms_ && df_ == other.df_ && corpus_size_ == other.corpus_size_;
    }

private:
    std::vector<std::string> terms_;
    std::vector<Index> df_;
    Index corpus_size_ = 0;
    std::unordered_map<std::string, Index> vocabulary_;
};

/// Vocabulary in first-appearance order. Throws EmptyCorpus on no documents.
TfidfModel tfidf_fit(std::span<const TokenDocument> docs);

/// Raw term count times smoothed idf, then L2-normalised. Unknown tokens are ignored.
FeatureVector tfidf_transform(const TfidfModel& model, const TokenDocument& doc);

std::vector<FeatureVector> tfidf_transform(const TfidfModel& model,
                                           std::span<const TokenDocument> docs);

}  // namespace engagelab
