#include "flatq/exec/repl.hpp"

#include "flatq/exec/corpus.hpp"
#include "flatq/lang/diagnostic.hpp"

#include <sstream>

namespace flatq::exec {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string> words(std::string_view s) {
    std::istringstream in{std::string(s)};
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

constexpr const char *kHelp =
    "Enter a query; a blank line runs it.\n"
    "  :engine [baseline|flat|flat-flattened]\n"
    "  :hist [name:bins:lo:hi ...]\n"
    "  :cancel   drop the buffered query\n"
    "  :quit\n";

}  // namespace

ReplSession::ReplSession(std::shared_ptr<const columnar::ColumnarDataset> data, Engine engine)
    : data_(std::move(data)), engine_(engine), fallback_{HistogramSpec{"h", 100, 0.0, 200.0}} {
    if (!data_) throw std::invalid_argument("repl needs a dataset");
}

ReplSession::Reply ReplSession::feed(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) return pending() ? run_buffer() : Reply{};
    if (line.front() == ':') return directive(line);
    buffer_ += line;
    buffer_ += '\n';
    return {};
}

ReplSession::Reply ReplSession::directive(std::string_view line) {
    auto w = words(line);
    const std::string &cmd = w.front();
    if (cmd == ":quit" || cmd == ":q") return {"", true};
    if (cmd == ":help") return {kHelp};
    if (cmd == ":cancel") {
        bool had = pending();
        buffer_.clear();
        return {had ? "cancelled\n" : "nothing to cancel\n"};
    }
    if (cmd == ":engine") {
        if (w.size() == 1) return {"engine " + std::string(to_string(engine_)) + "\n"};
        auto e = engine_from_name(w[1]);
        if (!e || w.size() > 2) return {"unknown engine '" + w[1] + "'; expected baseline, flat or flat-flattened\n"};
        engine_ = *e;
        return {"engine " + std::string(to_string(engine_)) + "\n"};
    }
    if (cmd == ":hist") {
        if (w.size() > 1) {
            std::vector<HistogramSpec> specs;
            try {
                for (std::size_t i = 1; i < w.size(); ++i) specs.push_back(HistogramSpec::parse(w[i]));
            } catch (const std::invalid_argument &e) {
                return {std::string("error: ") + e.what() + "\n"};
            }
            fallback_ = std::move(specs);
        }
        std::string out = "hist";
        for (const auto &s : fallback_) out += " " + s.to_string();
        return {out + "\n"};
    }
    return {"unknown directive '" + cmd + "'; try :help\n"};
}

ReplSession::Reply ReplSession::run_buffer() {
    std::string source = std::move(buffer_);
    buffer_.clear();
    try {
        auto specs = parse_hist_directives(source);
        if (specs.empty()) specs = fallback_;
        auto query = compile_query(source, data_->schema(), std::move(specs));
        auto result = run(query, *data_, engine_);
        std::string out = std::string(to_string(engine_)) + " over " + std::to_string(data_->num_entries()) + " events\n";
        out += summarize(result);
        last_ = std::move(result);
        return {out};
    } catch (const lang::QueryError &e) {
        return {lang::render(e.diagnostic(), source, "<input>")};
    } catch (const std::exception &e) {
        return {std::string("error: ") + e.what() + "\n"};
    }
}

}  // namespace flatq::exec
