#include "framecot/backends.hpp"

#include "framecot/error.hpp"
#include "framecot/text_util.hpp"

#include <algorithm>
#include <cmath>

namespace framecot {

void validate(const RetrieveRequest& req) {
    if (is_blank(req.query)) fail(ErrorCode::InvalidArgument, "retrieve query is empty");
    if (!(req.fps > 0.0)) fail(ErrorCode::InvalidArgument, "retrieve fps must be positive");
}

void validate(const GenerateRequest& req) {
    if (is_blank(req.query)) fail(ErrorCode::InvalidArgument, "generate query is empty");
}

void validate(const EmbedRequest& req) {
    if (is_blank(req.text)) fail(ErrorCode::InvalidArgument, "embed text is empty after trimming");
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) fail(ErrorCode::LengthMismatch, "embedding dimensions differ");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);  // rounding can overshoot
}

}  // namespace framecot
