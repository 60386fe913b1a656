#include "driftscope/attributes.hpp"

#include "driftscope/dataset.hpp"
#include "driftscope/error.hpp"
#include "driftscope/influence.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace driftscope {

TextCorpus::TextCorpus(std::string name, std::vector<TextDocument> documents)
    : name_(std::move(name)), documents_(std::move(documents)) {
    std::set<std::string> seen;
    for (const auto& doc : documents_) {
        if (doc.text.empty()) fail(ErrorKind::EmptyDocument, fmt::format("document '{}' in corpus '{}' is empty", doc.id, name_));
        if (!seen.insert(doc.id).second) fail(ErrorKind::InvalidArgument, fmt::format("duplicate document id '{}' in corpus '{}'", doc.id, name_));
    }
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// RFC 4180 records; quoted fields may span lines.
std::vector<std::vector<std::string>> csv_records(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"' && field.empty()) {
            quoted = any = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (any || !field.empty()) {
                row.push_back(std::move(field));
                rows.push_back(std::move(row));
            }
            row.clear();
            field.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (quoted) fail(ErrorKind::ParseError, "unterminated quoted field");
    if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string csv_cell(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

} // namespace

TextCorpus parse_corpus_csv(std::string_view text, std::string name) {
    auto rows = csv_records(text);
    if (rows.empty()) fail(ErrorKind::EmptyDataset, fmt::format("corpus '{}' has no header", name));
    if (rows.front().size() != 2) fail(ErrorKind::ParseError, "corpus CSV must have exactly two columns (id, text)");
    std::vector<TextDocument> docs;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != 2) fail(ErrorKind::ParseError, fmt::format("corpus CSV record {} has {} fields", r + 1, rows[r].size()));
        docs.push_back({std::string(trim(rows[r][0])), rows[r][1]});
    }
    if (docs.empty()) fail(ErrorKind::EmptyDataset, fmt::format("corpus '{}' has no documents", name));
    return TextCorpus(std::move(name), std::move(docs));
}

TextCorpus load_corpus(const std::filesystem::path& path, std::string name) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::ParseError, fmt::format("cannot open corpus {}", path.string()));
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    if (path.extension() == ".csv") return parse_corpus_csv(text, std::move(name));
    std::vector<TextDocument> docs;
    std::istringstream lines(text);
    std::string line;
    for (std::size_t no = 1; std::getline(lines, line); ++no) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        docs.push_back({std::to_string(no), line});
    }
    if (docs.empty()) fail(ErrorKind::EmptyDataset, fmt::format("corpus {} has no documents", path.string()));
    return TextCorpus(std::move(name), std::move(docs));
}

AttributeSet default_attributes() {
    return {"Have consistent writing structure", "Use formal language", "Have a neutral tone", "Show subjective opinion",
            "Use of technical references"};
}

void validate_attributes(const AttributeSet& attributes) {
    if (attributes.empty()) fail(ErrorKind::EmptyAttributeSet, "no attributes given");
    for (std::size_t k = 0; k < attributes.size(); ++k) {
        if (trim(attributes[k]).empty()) fail(ErrorKind::EmptyAttributeSet, fmt::format("attribute {} is empty", k + 1));
    }
}

std::string build_attribute_prompt(const AttributeSet& attributes, std::string_view document) {
    validate_attributes(attributes);
    if (document.empty()) fail(ErrorKind::EmptyDocument, "empty document");
    std::string out = "Analyze the following text by answering the following questions including:\n";
    for (std::size_t k = 0; k < attributes.size(); ++k) out += fmt::format("{}. {}\n", k + 1, attributes[k]);
    out += "For each question provide \"YES OR NO\" answer only.\n";
    out += document;
    return out;
}

std::string build_humanize_prompt(std::string_view document) {
    if (document.empty()) fail(ErrorKind::EmptyDocument, "empty document");
    std::string out = "Make the following context sound less formal, paraphrase using some colloquial\nlanguage.\n";
    out += document;
    return out;
}

std::string_view to_string(Answer a) {
    switch (a) {
    case Answer::yes: return "yes";
    case Answer::no: return "no";
    case Answer::unparsed: return "unparsed";
    }
    return "unparsed";
}

namespace {

// Leading "3.", "3)", "3:", "3 -", "Q3.", "(3)" etc.; returns the number and strips it.
std::optional<std::size_t> take_number(std::string_view& line) {
    std::string_view s = trim(line);
    if (!s.empty() && (s.front() == '-' || s.front() == '*')) s = trim(s.substr(1));
    if (!s.empty() && (s.front() == '(' || s.front() == '#')) s.remove_prefix(1);
    if (s.size() > 1 && (s.front() == 'Q' || s.front() == 'q') && std::isdigit(static_cast<unsigned char>(s[1]))) s.remove_prefix(1);
    std::size_t i = 0, value = 0;
    while (i < s.size() && i < 6 && std::isdigit(static_cast<unsigned char>(s[i]))) value = value * 10 + static_cast<std::size_t>(s[i++] - '0');
    if (i == 0 || i == 6) return std::nullopt;
    std::string_view rest = trim(s.substr(i));
    if (rest.empty() || (rest.front() != '.' && rest.front() != ')' && rest.front() != ':' && rest.front() != '-')) return std::nullopt;
    line = rest.substr(1);
    return value;
}

std::vector<Answer> tokens(std::string_view s) {
    std::vector<Answer> out;
    std::size_t i = 0;
    while (i < s.size()) {
        if (!std::isalpha(static_cast<unsigned char>(s[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        std::string word;
        while (j < s.size() && std::isalpha(static_cast<unsigned char>(s[j]))) word += static_cast<char>(std::tolower(static_cast<unsigned char>(s[j++])));
        if (word == "yes") out.push_back(Answer::yes);
        else if (word == "no") out.push_back(Answer::no);
        i = j;
    }
    return out;
}

} // namespace

std::vector<Answer> parse_answers(std::string_view completion, std::size_t n_attributes) {
    std::vector<Answer> out(n_attributes, Answer::unparsed);
    std::size_t cursor = 0;
    std::size_t start = 0;
    while (start <= completion.size()) {
        std::size_t end = completion.find('\n', start);
        if (end == std::string_view::npos) end = completion.size();
        std::string_view line = completion.substr(start, end - start);
        start = end + 1;

        const auto number = take_number(line);
        if (auto colon = line.rfind(':'); colon != std::string_view::npos) line = line.substr(colon + 1);
        const auto found = tokens(line);
        if (number) {
            if (*number == 0 || *number > n_attributes) continue;
            const std::size_t slot = *number - 1;
            cursor = slot;
            if (found.empty()) continue;
            const bool agree = std::all_of(found.begin(), found.end(), [&](Answer a) { return a == found.front(); });
            out[slot] = agree ? found.front() : Answer::unparsed;
            cursor = slot + 1;
            continue;
        }
        for (Answer a : found) {
            if (cursor < n_attributes) out[cursor] = a;
            ++cursor;
        }
    }
    return out;
}

std::optional<double> AttributeTable::yes_percent(std::size_t k) const {
    const std::size_t n = answered(k);
    if (n == 0) return std::nullopt;
    return 100.0 * static_cast<double>(yes.at(k)) / static_cast<double>(n);
}

namespace {
double share(std::size_t count, std::size_t total) {
    return total == 0 ? 0.0 : 100.0 * static_cast<double>(count) / static_cast<double>(total);
}
} // namespace

double AttributeTable::yes_share(std::size_t k) const { return share(yes.at(k), documents.size()); }
double AttributeTable::no_share(std::size_t k) const { return share(no.at(k), documents.size()); }
double AttributeTable::unparsed_share(std::size_t k) const { return share(unparsed.at(k), documents.size()); }

double AttributeTable::coverage() const {
    return corpus_size == 0 ? 0.0 : static_cast<double>(documents.size()) / static_cast<double>(corpus_size);
}

std::size_t AttributeTable::total_unparsed() const { return std::accumulate(unparsed.begin(), unparsed.end(), std::size_t{0}); }

namespace {

AttributeTable empty_table(std::string corpus, const AttributeSet& attributes, std::size_t corpus_size) {
    AttributeTable t;
    t.corpus = std::move(corpus);
    t.attributes = attributes;
    t.yes.assign(attributes.size(), 0);
    t.no.assign(attributes.size(), 0);
    t.unparsed.assign(attributes.size(), 0);
    t.corpus_size = corpus_size;
    return t;
}

void add_document(AttributeTable& t, std::string id, std::string completion) {
    DocumentAnswers doc{std::move(id), std::move(completion), {}};
    doc.answers = parse_answers(doc.completion, t.attributes.size());
    for (std::size_t k = 0; k < doc.answers.size(); ++k) {
        switch (doc.answers[k]) {
        case Answer::yes: ++t.yes[k]; break;
        case Answer::no: ++t.no[k]; break;
        case Answer::unparsed: ++t.unparsed[k]; break;
        }
    }
    t.documents.push_back(std::move(doc));
}

} // namespace

AttributeTable attribute_percentages(const TextCorpus& corpus, const AttributeSet& attributes, LlmProvider& provider,
                                     const AttributeRunOptions& options) {
    validate_attributes(attributes);
    const auto& docs = corpus.documents();
    const std::size_t n = docs.size();
    std::vector<std::optional<std::string>> completions(n);
    std::vector<std::optional<std::string>> errors(n);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr fatal;
    std::mutex fatal_mu;

    auto worker = [&] {
        while (!stop.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                completions[i] = provider.complete({build_attribute_prompt(attributes, docs[i].text), docs[i].id, docs[i].text});
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::ProviderError) {
                    std::lock_guard lock(fatal_mu);
                    if (!fatal) fatal = std::current_exception();
                    stop = true;
                    return;
                }
                errors[i] = e.what();
                if (options.stop_on_failure) stop = true;
            } catch (...) {
                std::lock_guard lock(fatal_mu);
                if (!fatal) fatal = std::current_exception();
                stop = true;
                return;
            }
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(options.concurrency, 1, std::max<std::size_t>(n, 1));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (fatal) std::rethrow_exception(fatal);

    AttributeTable table = empty_table(corpus.name(), attributes, n);
    std::ofstream audit;
    if (options.audit_log) {
        audit.open(*options.audit_log, std::ios::binary | std::ios::trunc);
        if (!audit) fail(ErrorKind::ConfigError, fmt::format("cannot write audit log {}", options.audit_log->string()));
        nlohmann::json header{{"type", "header"},      {"corpus", corpus.name()},      {"corpus_size", n},
                              {"attributes", attributes}, {"provider", provider.name()}, {"settings", provider.settings()}};
        audit << header.dump() << '\n';
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (completions[i]) {
            if (audit.is_open()) audit << nlohmann::json{{"type", "completion"}, {"id", docs[i].id}, {"completion", *completions[i]}}.dump() << '\n';
            add_document(table, docs[i].id, std::move(*completions[i]));
        } else if (errors[i]) {
            if (audit.is_open()) audit << nlohmann::json{{"type", "failure"}, {"id", docs[i].id}, {"message", *errors[i]}}.dump() << '\n';
            table.failures.push_back({docs[i].id, *errors[i]});
        }
    }
    return table;
}

AttributeTable replay_audit(const std::filesystem::path& audit_log) {
    std::ifstream in(audit_log, std::ios::binary);
    if (!in) fail(ErrorKind::ParseError, fmt::format("cannot open audit log {}", audit_log.string()));
    std::optional<AttributeTable> table;
    std::string line;
    for (std::size_t no = 1; std::getline(in, line); ++no) {
        if (trim(line).empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            const auto type = j.at("type").get<std::string>();
            if (type == "header") {
                if (table) fail(ErrorKind::ParseError, fmt::format("audit log line {}: second header", no));
                const auto attributes = j.at("attributes").get<AttributeSet>();
                validate_attributes(attributes);
                table = empty_table(j.at("corpus").get<std::string>(), attributes, j.at("corpus_size").get<std::size_t>());
                continue;
            }
            if (!table) fail(ErrorKind::ParseError, fmt::format("audit log line {}: record before header", no));
            if (type == "completion") add_document(*table, j.at("id").get<std::string>(), j.at("completion").get<std::string>());
            else if (type == "failure") table->failures.push_back({j.at("id").get<std::string>(), j.at("message").get<std::string>()});
            else fail(ErrorKind::ParseError, fmt::format("audit log line {}: unknown record type '{}'", no, type));
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorKind::ParseError, fmt::format("audit log line {}: {}", no, e.what()));
        }
    }
    if (!table) fail(ErrorKind::ParseError, fmt::format("audit log {} has no header", audit_log.string()));
    return std::move(*table);
}

bool same_table(const AttributeTable& a, const AttributeTable& b) {
    if (a.corpus != b.corpus || a.attributes != b.attributes || a.yes != b.yes || a.no != b.no || a.unparsed != b.unparsed ||
        a.corpus_size != b.corpus_size || a.documents.size() != b.documents.size() || a.failures.size() != b.failures.size())
        return false;
    std::map<std::string, const DocumentAnswers*> by_id;
    for (const auto& d : a.documents) by_id[d.id] = &d;
    for (const auto& d : b.documents) {
        auto it = by_id.find(d.id);
        if (it == by_id.end() || it->second->answers != d.answers || it->second->completion != d.completion) return false;
    }
    return true;
}

TextCorpus humanize_corpus(const TextCorpus& corpus, LlmProvider& provider, std::string name) {
    std::vector<TextDocument> out;
    for (const auto& doc : corpus.documents()) {
        std::string text(trim(provider.complete({build_humanize_prompt(doc.text), doc.id, doc.text})));
        if (text.empty()) fail(ErrorKind::ProviderError, fmt::format("empty rewrite for document '{}'", doc.id));
        out.push_back({doc.id, std::move(text)});
    }
    return TextCorpus(std::move(name), std::move(out));
}

std::vector<std::vector<double>> attribute_vectors(const AttributeTable& table) {
    std::vector<std::vector<double>> out;
    for (const auto& doc : table.documents) {
        std::vector<double> v;
        for (Answer a : doc.answers) v.push_back(a == Answer::yes ? 1.0 : 0.0);
        out.push_back(std::move(v));
    }
    return out;
}

Separability separability_score(const AttributeTable& table_d, const AttributeTable& table_dp, std::uint64_t seed, double l2) {
    if (table_d.attributes != table_dp.attributes) fail(ErrorKind::SchemaMismatch, "attribute sets differ");
    auto s = separability_score(attribute_vectors(table_d), attribute_vectors(table_dp), seed, l2);
    s.imputed = table_d.total_unparsed() + table_dp.total_unparsed();
    return s;
}

Separability separability_score(const std::vector<std::vector<double>>& d, const std::vector<std::vector<double>>& dp,
                                std::uint64_t seed, double l2) {
    if (d.empty() || dp.empty()) fail(ErrorKind::EmptyDataset, "both corpora need documents");
    const std::size_t m = d.front().size();
    const std::size_t n = d.size() + dp.size();
    RowMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = i < d.size() ? d[i] : dp[i - d.size()];
        if (row.size() != m) fail(ErrorKind::DimensionMismatch, "attribute vectors differ in length");
        for (std::size_t j = 0; j < m; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
        y[i] = i < d.size() ? 0 : 1;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t n_test = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(0.2 * static_cast<double>(n))), 1, n - 1);
    const std::size_t n_train = n - n_test;
    auto take = [&](std::size_t from, std::size_t count, RowMatrix& xs, std::vector<int>& ys) {
        xs.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(m));
        ys.resize(count);
        for (std::size_t i = 0; i < count; ++i) {
            xs.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(order[from + i]));
            ys[i] = y[order[from + i]];
        }
    };
    RowMatrix xtr, xte;
    std::vector<int> ytr, yte;
    take(0, n_train, xtr, ytr);
    take(n_train, n_test, xte, yte);
    LogisticOptions opts;
    opts.l2 = l2;
    const auto model = fit_logistic(xtr, ytr, opts);
    return {model.accuracy(xte, yte), n_train, n_test, 0};
}

std::string attribute_csv(const std::vector<AttributeTable>& tables) {
    if (tables.empty()) fail(ErrorKind::InvalidArgument, "no attribute tables");
    const auto& attrs = tables.front().attributes;
    std::string out = "corpus";
    for (const auto& a : attrs) out += "," + csv_cell(a);
    out += '\n';
    for (const auto& t : tables) {
        if (t.attributes != attrs) fail(ErrorKind::SchemaMismatch, fmt::format("corpus '{}' uses a different attribute set", t.corpus));
        out += csv_cell(t.corpus);
        for (std::size_t k = 0; k < attrs.size(); ++k) {
            const auto p = t.yes_percent(k);
            out += p ? fmt::format(",{:.2f}", *p) : std::string(",");
        }
        out += '\n';
    }
    return out;
}

} // namespace driftscope
