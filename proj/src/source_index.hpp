#pragma once

#include "conflict_radar/syntax.hpp"

#include <algorithm>
#include <string_view>
#include <vector>

namespace conflict_radar::detail {

// Maps byte offsets to 1-based line/column positions.
class SourceIndex {
public:
    explicit SourceIndex(std::string_view source) : size_(source.size())
    {
        lineStarts_.push_back(0);
        for (std::size_t i = 0; i < source.size(); ++i) {
            if (source[i] == '\n') {
                lineStarts_.push_back(i + 1);
            }
        }
    }

    std::pair<int, int> position(std::size_t offset) const
    {
        const auto it = std::upper_bound(lineStarts_.begin(), lineStarts_.end(), offset);
        const auto line = static_cast<std::size_t>(it - lineStarts_.begin());
        return {static_cast<int>(line), static_cast<int>(offset - lineStarts_[line - 1] + 1)};
    }

    Span span(std::size_t start, std::size_t end) const
    {
        const auto [sl, sc] = position(start);
        const auto [el, ec] = position(end);
        return Span{start, end, sl, sc, el, ec};
    }

    Span eof() const { return span(size_, size_); }

private:
    std::size_t size_;
    std::vector<std::size_t> lineStarts_;
};

} // namespace conflict_radar::detail
