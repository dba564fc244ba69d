#include "framecot/eval_harness.hpp"

#include "framecot/error.hpp"
#include "framecot/parallel.hpp"
#include "framecot/text_util.hpp"

#include <algorithm>
#include <chrono>
#include <set>

namespace framecot {

std::string extract_answer(const InterleavedTrace& trace) {
    return trace.answer ? std::string(trim(*trace.answer)) : std::string{};
}

std::string normalize_answer(std::string_view text) {
    std::string collapsed;
    bool pending_space = false;
    for (char c : trim(text)) {
        if (is_space(c)) {
            pending_space = true;
            continue;
        }
        if (pending_space && !collapsed.empty()) collapsed.push_back(' ');
        pending_space = false;
        collapsed.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    auto terminal = [](char c) { return c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':'; };
    while (!collapsed.empty() && (terminal(collapsed.back()) || collapsed.back() == ' ')) collapsed.pop_back();
    return collapsed;
}

std::optional<std::size_t> gold_choice_index(const QaItem& item) {
    if (item.choices.empty()) return std::nullopt;
    const std::string gold = std::string(trim(item.gold_answer));
    for (std::size_t i = 0; i < item.choices.size(); ++i) {
        if (gold == std::to_string(i)) return i;
    }
    const std::string norm = normalize_answer(gold);
    std::optional<std::size_t> found;
    for (std::size_t i = 0; i < item.choices.size(); ++i) {
        if (normalize_answer(item.choices[i]) == norm) {
            if (found) fail(ErrorCode::InvalidArgument, "gold answer of '" + item.item_id + "' matches several choices");
            found = i;
        }
    }
    if (!found) fail(ErrorCode::InvalidArgument, "gold answer of '" + item.item_id + "' matches no choice");
    return found;
}

namespace {

bool label_matches(std::string_view norm, const std::string& label) {
    if (norm == label) return true;
    if (norm.size() > label.size() && norm.substr(0, label.size()) == label) {
        const char next = norm[label.size()];
        if (next == ':' || next == '.' || next == ')') return true;
    }
    const std::string paren = "(" + label + ")";
    return norm.substr(0, paren.size()) == paren;
}

}  // namespace

bool match_answer(std::string_view extracted, const QaItem& item) {
    const std::string norm = normalize_answer(extracted);
    if (norm.empty()) return false;
    if (item.choices.empty()) return norm == normalize_answer(item.gold_answer);

    std::vector<std::string> choice_norms;
    for (const auto& c : item.choices) choice_norms.push_back(normalize_answer(c));

    std::set<std::size_t> by_text;
    for (std::size_t i = 0; i < choice_norms.size(); ++i) {
        if (!choice_norms[i].empty() && norm.find(choice_norms[i]) != std::string::npos) by_text.insert(i);
    }
    std::set<std::size_t> subsumed;
    for (auto i : by_text) {
        for (auto j : by_text) {
            if (i != j && choice_norms[i].size() < choice_norms[j].size() &&
                choice_norms[j].find(choice_norms[i]) != std::string::npos) {
                subsumed.insert(i);
            }
        }
    }
    std::set<std::size_t> candidates;
    for (auto i : by_text) {
        if (subsumed.count(i) == 0) candidates.insert(i);
    }
    for (std::size_t i = 0; i < item.choices.size(); ++i) {
        if (label_matches(norm, std::to_string(i))) candidates.insert(i);
    }

    if (candidates.empty()) return false;
    if (candidates.size() > 1) {
        fail(ErrorCode::AmbiguousMatch, "answer for '" + item.item_id + "' names " +
                                            std::to_string(candidates.size()) + " choices");
    }
    return *candidates.begin() == gold_choice_index(item).value();
}

ItemResult score_item(const QaItem& item, const Engine& engine, const EvalOptions& opts) {
    ItemResult r;
    r.item_id = item.item_id;
    if (opts.category_key == "source_dataset") {
        r.category = item.source_dataset;
    } else {
        r.category = item.category.value_or("uncategorized");
    }
    const auto start = std::chrono::steady_clock::now();
    try {
        EngineOutcome outcome = engine.run(item);
        r.status = std::string(to_string(outcome.status));
        r.tool_used = outcome.tool_used;
        r.failure_injected = outcome.failure_injected;
        r.extracted_answer = extract_answer(outcome.trace);
        try {
            r.correct = match_answer(r.extracted_answer, item);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::AmbiguousMatch) throw;
            r.correct = false;
            r.error = "ambiguous_match";
        }
    } catch (const Error& e) {
        r.status = "error";
        r.correct = false;
        r.error = std::string(to_string(e.code()));
    }
    r.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return r;
}

EvalResult aggregate(std::vector<ItemResult> items, double failure_injection_rate) {
    std::sort(items.begin(), items.end(), [](const ItemResult& a, const ItemResult& b) { return a.item_id < b.item_id; });
    EvalResult res;
    res.failure_injection_rate = failure_injection_rate;
    for (const auto& r : items) {
        ++res.total;
        res.correct += r.correct ? 1 : 0;
        res.with_tool += r.tool_used ? 1 : 0;
        auto& cat = res.per_category[r.category];
        ++cat.total;
        cat.correct += r.correct ? 1 : 0;
        auto& tool = res.per_tool[r.tool_used ? std::string(to_string(*r.tool_used)) : "none"];
        ++tool.total;
        tool.correct += r.correct ? 1 : 0;
    }
    if (res.total > 0) {
        res.accuracy = static_cast<double>(res.correct) / static_cast<double>(res.total);
        res.call_rate = static_cast<double>(res.with_tool) / static_cast<double>(res.total);
    }
    res.items = std::move(items);
    return res;
}

EvalResult evaluate(const std::vector<QaItem>& items, const Engine& engine, const EvalOptions& opts) {
    if (items.empty()) fail(ErrorCode::InvalidArgument, "evaluate needs at least one item");
    auto slots = parallel_map<ItemResult>(
        items.size(), opts.workers, [&](std::size_t i) { return score_item(items[i], engine, opts); }, opts.cancel);
    std::vector<ItemResult> done;
    bool incomplete = false;
    for (auto& s : slots) {
        if (s) {
            done.push_back(std::move(*s));
        } else {
            incomplete = true;
        }
    }
    EvalResult res = aggregate(std::move(done), engine.config().failure_injection_rate);
    res.incomplete = incomplete;
    return res;
}

std::vector<EvalResult> rate_sweep(const std::vector<QaItem>& items, const EngineConfig& base, const FrameStore& store,
                                   Backends backends, const std::vector<double>& rates, const EvalOptions& opts) {
    std::vector<EvalResult> out;
    for (double rate : rates) {
        EngineConfig cfg = base;
        cfg.failure_injection_rate = rate;
        Engine engine(cfg, store, backends);
        out.push_back(evaluate(items, engine, opts));
    }
    return out;
}

}  // namespace framecot
