#pragma once

#include "driftscope/llm.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace driftscope {

struct TextDocument {
    std::string id;
    std::string text;
};

class TextCorpus {
public:
    // Throws EmptyDocument for an empty text and InvalidArgument for a repeated id.
    TextCorpus(std::string name, std::vector<TextDocument> documents);

    const std::string& name() const noexcept { return name_; }
    const std::vector<TextDocument>& documents() const noexcept { return documents_; }
    std::size_t size() const noexcept { return documents_.size(); }

private:
    std::string name_;
    std::vector<TextDocument> documents_;
};

// A .csv file holds (id, text) records with a header row and RFC 4180 quoting.
// Anything else is one document per non-blank line, ids "1", "2", ... by line.
TextCorpus load_corpus(const std::filesystem::path& path, std::string name);
TextCorpus parse_corpus_csv(std::string_view text, std::string name);

using AttributeSet = std::vector<std::string>;

// The attribute questions of the reference study.
AttributeSet default_attributes();

// Throws EmptyAttributeSet for an empty set or an empty question.
void validate_attributes(const AttributeSet& attributes);

std::string build_attribute_prompt(const AttributeSet& attributes, std::string_view document);
std::string build_humanize_prompt(std::string_view document);

enum class Answer { yes, no, unparsed };

std::string_view to_string(Answer a);

// Line-wise YES/NO token scan. A numbered line ("3. yes", "Q3) NO") fills its
// own slot, and conflicting tokens there leave it unparsed. Other tokens fill
// the slots after the last one written. On a line with a colon only the text
// after the last colon counts, so "1. Use formal language: YES" works.
std::vector<Answer> parse_answers(std::string_view completion, std::size_t n_attributes);

struct DocumentAnswers {
    std::string id;
    std::string completion;
    std::vector<Answer> answers;
};

struct ProviderFailure {
    std::string id;
    std::string message;
};

struct AttributeTable {
    std::string corpus;
    AttributeSet attributes;
    std::vector<std::size_t> yes;        // per attribute
    std::vector<std::size_t> no;
    std::vector<std::size_t> unparsed;
    std::vector<DocumentAnswers> documents;  // answered documents, corpus order
    std::size_t corpus_size = 0;
    std::vector<ProviderFailure> failures;   // documents the provider gave up on

    std::size_t answered(std::size_t k) const { return yes.at(k) + no.at(k); }
    // YES over parsed answers, in percent; empty when nothing parsed.
    std::optional<double> yes_percent(std::size_t k) const;
    // Shares of all answered documents, summing to 100.
    double yes_share(std::size_t k) const;
    double no_share(std::size_t k) const;
    double unparsed_share(std::size_t k) const;
    // Answered documents over corpus size.
    double coverage() const;
    std::size_t total_unparsed() const;
};

struct AttributeRunOptions {
    std::size_t concurrency = 1;
    // Stop querying after the first failure instead of skipping the document.
    bool stop_on_failure = true;
    std::optional<std::filesystem::path> audit_log;   // JSONL, written in corpus order
};

// One query per document. Provider failures do not throw; the partial table
// lists them and reports coverage.
AttributeTable attribute_percentages(const TextCorpus& corpus, const AttributeSet& attributes, LlmProvider& provider,
                                     const AttributeRunOptions& options = {});

// Rebuilds the table from an audit log by re-parsing the stored completions.
AttributeTable replay_audit(const std::filesystem::path& audit_log);

bool same_table(const AttributeTable& a, const AttributeTable& b);

// Rewrites every document with the humanize prompt; ids are kept. Throws
// ProviderError on the first failure or empty rewrite.
TextCorpus humanize_corpus(const TextCorpus& corpus, LlmProvider& provider, std::string name);

// Unparsed slots become 0.
std::vector<std::vector<double>> attribute_vectors(const AttributeTable& table);

struct Separability {
    double accuracy = 0.0;
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
    std::size_t imputed = 0;   // unparsed slots counted as no
};

// Logistic model on a seeded 80/20 split of the documents, labelled by corpus.
// Throws SingleClass when the training part holds one corpus only.
Separability separability_score(const AttributeTable& table_d, const AttributeTable& table_dp, std::uint64_t seed,
                                double l2 = 1e-2);
Separability separability_score(const std::vector<std::vector<double>>& d, const std::vector<std::vector<double>>& dp,
                                std::uint64_t seed, double l2 = 1e-2);

// corpus,<attribute 1>,... with one row of YES percentages per table; cells
// with no parsed answer are left empty.
std::string attribute_csv(const std::vector<AttributeTable>& tables);

} // namespace driftscope
