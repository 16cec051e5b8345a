#pragma once

#include "flatq/exec/engine.hpp"

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flatq::exec {

/**
 * Line-driven interactive session over one dataset. Query lines accumulate
 * until a blank line, then the buffered query runs. Lines starting with `:`
 * are directives:
 *
 *   :engine [baseline|flat|flat-flattened]   show or switch engine
 *   :hist [name:bins:lo:hi ...]              show or set fallback histograms
 *   :cancel                                  drop the buffered query
 *   :help
 *   :quit
 *
 * A query's own `# hist:` lines take precedence over the fallback, which
 * defaults to `h:100:0:200`.
 */
class ReplSession {
public:
    struct Reply {
        std::string text;
        bool quit = false;
    };

    explicit ReplSession(std::shared_ptr<const columnar::ColumnarDataset> data, Engine engine = Engine::Flat);

    Reply feed(std::string_view line);

    bool pending() const { return !buffer_.empty(); }
    std::string_view prompt() const { return pending() ? "...    " : "flatq> "; }
    Engine engine() const { return engine_; }
    /// Histograms from the most recent successful run.
    const std::optional<HistogramMap> &last_result() const { return last_; }

private:
    Reply directive(std::string_view line);
    Reply run_buffer();

    std::shared_ptr<const columnar::ColumnarDataset> data_;
    Engine engine_;
    std::vector<HistogramSpec> fallback_;
    std::string buffer_;
    std::optional<HistogramMap> last_;
};

}  // namespace flatq::exec
