#include "ahce/hfm.hpp"

#include <algorithm>

namespace ahce::hfm {

namespace {

constexpr SegmentKind kKinds[] = {SegmentKind::Think, SegmentKind::Search, SegmentKind::Result, SegmentKind::Answer};

std::string open_tag(SegmentKind k) { return "<" + std::string(tag_name(k)) + ">"; }
std::string close_tag(SegmentKind k) { return "</" + std::string(tag_name(k)) + ">"; }

bool starts_with(std::string_view s, std::size_t pos, std::string_view prefix) {
    return s.size() - pos >= prefix.size() && s.compare(pos, prefix.size(), prefix) == 0;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

std::string decode(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        if (starts_with(s, i, "&lt;")) {
            out += '<';
            i += 4;
        } else if (starts_with(s, i, "&amp;")) {
            out += '&';
            i += 5;
        } else {
            out += s[i++];
        }
    }
    return out;
}

std::string encode(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '&') {
            out += "&amp;";
        } else if (c == '<') {
            out += "&lt;";
        } else {
            out += c;
        }
    }
    return out;
}

ParseError error(Violation v, std::size_t pos, std::string message) { return {v, pos, std::move(message)}; }

// Ordering rule shared by the parser and check_grammar.
std::optional<Violation> order_violation(const std::vector<Segment>& before, SegmentKind next) {
    if (!before.empty() && before.back().kind == SegmentKind::Answer) return Violation::content_after_answer;
    if (std::any_of(before.begin(), before.end(), [](const Segment& s) { return s.kind == SegmentKind::Answer; }))
        return Violation::content_after_answer;
    const bool after_search = !before.empty() && before.back().kind == SegmentKind::Search;
    if (next == SegmentKind::Result && !after_search) return Violation::result_without_search;
    if (next != SegmentKind::Result && after_search) return Violation::search_without_result;
    return std::nullopt;
}

}  // namespace

std::string_view to_string(SegmentKind k) {
    switch (k) {
        case SegmentKind::Think: return "Think";
        case SegmentKind::Search: return "Search";
        case SegmentKind::Result: return "Result";
        case SegmentKind::Answer: return "Answer";
    }
    return "Think";
}

std::string_view tag_name(SegmentKind k) {
    switch (k) {
        case SegmentKind::Think: return "think";
        case SegmentKind::Search: return "search";
        case SegmentKind::Result: return "result";
        case SegmentKind::Answer: return "Answer";
    }
    return "think";
}

std::string_view to_string(Violation v) {
    switch (v) {
        case Violation::unclosed_tag: return "unclosed_tag";
        case Violation::interleaved_tags: return "interleaved_tags";
        case Violation::unexpected_close_tag: return "unexpected_close_tag";
        case Violation::unknown_tag: return "unknown_tag";
        case Violation::stray_text: return "stray_text";
        case Violation::result_without_search: return "result_without_search";
        case Violation::search_without_result: return "search_without_result";
        case Violation::content_after_answer: return "content_after_answer";
    }
    return "stray_text";
}

int DialogueTranscript::count(SegmentKind k) const {
    return static_cast<int>(std::count_if(segments.begin(), segments.end(), [k](const Segment& s) { return s.kind == k; }));
}

ParseResult parse_transcript(std::string_view text) {
    DialogueTranscript t;
    std::size_t pos = 0;
    const std::size_t n = text.size();
    bool answered = false;

    while (true) {
        while (pos < n && is_space(text[pos])) ++pos;
        if (pos == n) break;
        if (answered) return error(Violation::content_after_answer, pos, "content after <Answer>");
        if (text[pos] != '<') return error(Violation::stray_text, pos, "text outside of any tag");

        std::optional<SegmentKind> kind;
        for (auto k : kKinds) {
            if (starts_with(text, pos, open_tag(k))) kind = k;
        }
        if (!kind) {
            if (starts_with(text, pos, "</")) return error(Violation::unexpected_close_tag, pos, "closing tag without opening tag");
            return error(Violation::unknown_tag, pos, "unknown tag");
        }

        const std::size_t tag_pos = pos;
        const std::size_t content_start = pos + open_tag(*kind).size();
        const std::string close = close_tag(*kind);
        std::optional<std::size_t> content_end;
        for (std::size_t p = content_start; p < n; ++p) {
            if (text[p] != '<') continue;
            if (starts_with(text, p, close)) {
                content_end = p;
                break;
            }
            for (auto k : kKinds) {
                if (starts_with(text, p, open_tag(k)) || starts_with(text, p, close_tag(k)))
                    return error(Violation::interleaved_tags, p, "tag inside <" + std::string(tag_name(*kind)) + ">");
            }
        }
        if (!content_end) return error(Violation::unclosed_tag, tag_pos, "unclosed <" + std::string(tag_name(*kind)) + ">");

        if (auto v = order_violation(t.segments, *kind)) return error(*v, tag_pos, std::string(to_string(*v)));
        t.segments.push_back({*kind, decode(text.substr(content_start, *content_end - content_start))});
        answered = *kind == SegmentKind::Answer;
        pos = *content_end + close.size();
    }
    if (!t.segments.empty() && t.segments.back().kind == SegmentKind::Search)
        return error(Violation::search_without_result, n, "search without result");
    return t;
}

std::string serialize(const DialogueTranscript& t) {
    std::string out;
    for (std::size_t i = 0; i < t.segments.size(); ++i) {
        if (i) out += '\n';
        const auto& s = t.segments[i];
        out += open_tag(s.kind) + encode(s.text) + close_tag(s.kind);
    }
    return out;
}

std::optional<ParseError> check_grammar(const DialogueTranscript& t) {
    std::vector<Segment> before;
    for (std::size_t i = 0; i < t.segments.size(); ++i) {
        if (auto v = order_violation(before, t.segments[i].kind)) return error(*v, i, std::string(to_string(*v)));
        before.push_back(t.segments[i]);
    }
    if (!before.empty() && before.back().kind == SegmentKind::Search)
        return error(Violation::search_without_result, before.size(), "search without result");
    return std::nullopt;
}

}  // namespace ahce::hfm
