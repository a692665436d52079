// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "gvr/retrieval.hpp"

#include "gvr/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>

namespace gvr {

std::vector<ViewHit> score_views(const SemanticVector& query, const SemanticVectorBook& svb) {
    if (query.dim() != svb.dim) {
        throw DomainError(fmt::format("query dimension {} does not match book dimension {}", query.dim(), svb.dim));
    }
    std::vector<ViewHit> hits;
    for (std::size_t i = 0; i < svb.views.size(); ++i) {
        const auto& view = svb.views[i];
        if (view.empty()) {
            continue;
        }
        ViewHit best;
        best.view_id = static_cast<int>(i);
        best.score = -2.0;
        for (const auto& e : view) {
            const double s = cosine(query, e.vector);
            if (s > best.score) {
                best.score = s;
                best.patch_id = e.patch_id;
                best.loc2d = e.centroid;
            }
        }
        hits.push_back(best);
    }
    return hits;
}

std::vector<ViewHit> select_top_k_views(std::vector<ViewHit> hits, int k) {
    if (k < 1) {
        throw DomainError(fmt::format("top-k needs k >= 1, got {}", k));
    }
    std::stable_sort(hits.begin(), hits.end(), [](const ViewHit& a, const ViewHit& b) {
        return a.score != b.score ? a.score > b.score : a.view_id < b.view_id;
    });
    if (hits.size() > static_cast<std::size_t>(k)) {
        hits.resize(static_cast<std::size_t>(k));
    }
    return hits;
}

std::optional<double> sample_depth(const DepthMap& map, PixelLocation px) {
    const PixelIndex p = nearest_pixel(px);
    const auto inside = [&](int x, int y) { return x >= 0 && y >= 0 && x < map.width && y < map.height; };
    if (inside(p.x, p.y) && map.at(p.x, p.y) > 0.0f) {
        return map.at(p.x, p.y);
    }
    std::vector<double> covered;
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            if ((dx != 0 || dy != 0) && inside(p.x + dx, p.y + dy) && map.at(p.x + dx, p.y + dy) > 0.0f) {
                covered.push_back(map.at(p.x + dx, p.y + dy));
            }
        }
    }
    if (covered.empty()) {
        return std::nullopt;
    }
    std::sort(covered.begin(), covered.end());
    const std::size_t m = covered.size();
    return m % 2 == 1 ? covered[m / 2] : 0.5 * (covered[m / 2 - 1] + covered[m / 2]);
}

std::vector<ViewHit> localize_hits(std::vector<ViewHit> hits, const DepthBook& db,
                                   const std::vector<CameraModel>& cams) {
    for (auto& h : hits) {
        if (h.view_id < 0 || static_cast<std::size_t>(h.view_id) >= db.size() ||
            static_cast<std::size_t>(h.view_id) >= cams.size()) {
            throw DomainError(fmt::format("hit references unknown view {}", h.view_id));
        }
        const auto depth = sample_depth(db.maps[static_cast<std::size_t>(h.view_id)], h.loc2d);
        h.loc3d = depth ? std::optional<WorldPoint>(back_project(h.loc2d, *depth, cams[static_cast<std::size_t>(h.view_id)]))
                        : std::nullopt;
    }
    return hits;
}

VoteResult stereo_vote(const std::vector<ViewHit>& hits, double epsilon) {
    std::vector<const ViewHit*> cand;
    std::vector<int> unlocalized;
    for (const auto& h : hits) {
        if (h.loc3d) {
            cand.push_back(&h);
        } else {
            unlocalized.push_back(h.view_id);
        }
    }
    if (cand.empty()) {
        throw GroundingError("vote", "no 3D evidence");
    }
    std::sort(cand.begin(), cand.end(), [](const ViewHit* a, const ViewHit* b) {
        return a->view_id != b->view_id ? a->view_id < b->view_id : a->patch_id < b->patch_id;
    });

    const std::size_t n = cand.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    const auto find = [&](std::size_t i) {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if ((*cand[i]->loc3d - *cand[j]->loc3d).norm() <= epsilon) {
                const std::size_t a = find(i);
                const std::size_t b = find(j);
                if (a != b) {
                    parent[std::max(a, b)] = std::min(a, b);
                }
            }
        }
    }

    // Roots are the lowest member index, so the lowest view id of a component
    // is cand[root]->view_id.
    struct Component {
        std::size_t size = 0;
        double score = 0.0;
    };
    std::vector<Component> comp(n);
    for (std::size_t i = 0; i < n; ++i) {
        Component& c = comp[find(i)];
        ++c.size;
        c.score += cand[i]->score;
    }
    std::size_t best = n;
    for (std::size_t r = 0; r < n; ++r) {
        if (comp[r].size == 0) {
            continue;
        }
        if (best == n || comp[r].size > comp[best].size ||
            (comp[r].size == comp[best].size && comp[r].score > comp[best].score)) {
            best = r;
        }
    }

    VoteResult result;
    WorldPoint sum = WorldPoint::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        if (find(i) == best) {
            sum += *cand[i]->loc3d;
            result.supporters.push_back(cand[i]->view_id);
        } else {
            result.rejected.push_back(cand[i]->view_id);
        }
    }
    result.location = sum / static_cast<double>(comp[best].size);
    result.rejected.insert(result.rejected.end(), unlocalized.begin(), unlocalized.end());
    std::sort(result.rejected.begin(), result.rejected.end());
    return result;
}

} // namespace gvr
