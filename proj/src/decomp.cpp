#include "dspm/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <queue>

#include "dspm/error.hpp"

namespace dspm {

double Decomposition::mean_spacing() const {
    return std::sqrt(static_cast<double>(pixel_count()) / k);
}

double Decomposition::sigma1() const { return 0.5 * mean_spacing(); }

std::int32_t Decomposition::superpixel_at(double x, double y) const {
    // Round half away from zero, then clamp into the image rectangle.
    long xi = std::lround(x);
    long yi = std::lround(y);
    xi = std::clamp(xi, 0L, static_cast<long>(width) - 1);
    yi = std::clamp(yi, 0L, static_cast<long>(height) - 1);
    return label_at(static_cast<int>(xi), static_cast<int>(yi));
}

namespace {

// Flood-fill from `start`, marking visited pixels that share its label.
// Returns the component size.
std::size_t flood_component(int width, int height,
                            const std::vector<std::int32_t>& labels,
                            std::vector<std::uint8_t>& visited,
                            std::size_t start) {
    const std::int32_t id = labels[start];
    std::size_t count = 0;
    std::vector<std::size_t> stack{start};
    visited[start] = 1;
    while (!stack.empty()) {
        const std::size_t p = stack.back();
        stack.pop_back();
        ++count;
        const int x = static_cast<int>(p % width);
        const int y = static_cast<int>(p / width);
        const int nx[4] = {x - 1, x + 1, x, x};
        const int ny[4] = {y, y, y - 1, y + 1};
        for (int i = 0; i < 4; ++i) {
            if (nx[i] < 0 || nx[i] >= width || ny[i] < 0 || ny[i] >= height) continue;
            const std::size_t q = static_cast<std::size_t>(ny[i]) * width + nx[i];
            if (!visited[q] && labels[q] == id) {
                visited[q] = 1;
                stack.push_back(q);
            }
        }
    }
    return count;
}

}  // namespace

Decomposition build_decomposition(int width, int height,
                                  std::vector<std::int32_t> labels) {
    if (width <= 0 || height <= 0)
        fail(ErrorKind::FormatViolation, "decomposition dimensions must be positive");
    const std::size_t n = static_cast<std::size_t>(width) * height;
    if (labels.size() != n)
        fail(ErrorKind::FormatViolation,
             "label map has " + std::to_string(labels.size()) + " entries, expected " +
                 std::to_string(n));

    std::int32_t max_id = -1;
    for (std::int32_t v : labels) {
        if (v < 0) fail(ErrorKind::FormatViolation, "negative superpixel id in label map");
        max_id = std::max(max_id, v);
    }

    // Compact ids to 0..K-1 in increasing order of original value.
    std::vector<std::int32_t> remap(static_cast<std::size_t>(max_id) + 1, -1);
    for (std::int32_t v : labels) remap[v] = 0;
    std::int32_t k = 0;
    bool gaps = false;
    for (std::size_t i = 0; i < remap.size(); ++i) {
        if (remap[i] == 0) {
            remap[i] = k++;
        } else {
            gaps = true;
        }
    }
    if (gaps)
        for (std::int32_t& v : labels) v = remap[v];

    Decomposition d;
    d.width = width;
    d.height = height;
    d.k = k;
    d.labels = std::move(labels);
    d.remapped = gaps;

    // Each id must form a single 4-connected component.
    {
        std::vector<std::uint8_t> visited(n, 0);
        std::vector<std::uint8_t> seen(static_cast<std::size_t>(k), 0);
        for (std::size_t p = 0; p < n; ++p) {
            if (visited[p]) continue;
            const std::int32_t id = d.labels[p];
            if (seen[id])
                fail(ErrorKind::FormatViolation,
                     "superpixel " + std::to_string(id) + " is not 4-connected");
            seen[id] = 1;
            flood_component(width, height, d.labels, visited, p);
        }
    }

    d.barycenters.assign(static_cast<std::size_t>(k), Vec2{0.0, 0.0});
    d.members.assign(static_cast<std::size_t>(k), {});
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const std::int32_t id = d.label_at(x, y);
            d.barycenters[id].x += x;
            d.barycenters[id].y += y;
            ++counts[id];
            d.members[id].push_back(static_cast<std::int32_t>(y) * width + x);
        }
    }
    for (std::int32_t i = 0; i < k; ++i) {
        d.barycenters[i].x /= counts[i];
        d.barycenters[i].y /= counts[i];
    }

    d.adjacency.assign(static_cast<std::size_t>(k), {});
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const std::int32_t a = d.label_at(x, y);
            if (x + 1 < width) {
                const std::int32_t b = d.label_at(x + 1, y);
                if (a != b) {
                    d.adjacency[a].push_back(b);
                    d.adjacency[b].push_back(a);
                }
            }
            if (y + 1 < height) {
                const std::int32_t b = d.label_at(x, y + 1);
                if (a != b) {
                    d.adjacency[a].push_back(b);
                    d.adjacency[b].push_back(a);
                }
            }
        }
    }
    for (auto& neigh : d.adjacency) {
        std::sort(neigh.begin(), neigh.end());
        neigh.erase(std::unique(neigh.begin(), neigh.end()), neigh.end());
    }
    return d;
}

Decomposition load_decomposition(const std::string& label_png_path,
                                 const RgbImage& image) {
    GrayImage16 map = load_gray16_png(label_png_path);
    if (map.width != image.width || map.height != image.height)
        fail(ErrorKind::FormatViolation,
             "label map is " + std::to_string(map.width) + "x" + std::to_string(map.height) +
                 " but image is " + std::to_string(image.width) + "x" +
                 std::to_string(image.height));
    std::vector<std::int32_t> labels(map.pixels.begin(), map.pixels.end());
    return build_decomposition(map.width, map.height, std::move(labels));
}

Decomposition load_decomposition(const std::string& label_png_path,
                                 const std::string& image_png_path) {
    return load_decomposition(label_png_path, load_rgb_png(image_png_path));
}

GrayImage16 to_label_map(const Decomposition& d) {
    if (d.k > 65536)
        fail(ErrorKind::FormatViolation,
             "decomposition has too many superpixels for a 16-bit label map");
    GrayImage16 out;
    out.width = d.width;
    out.height = d.height;
    out.pixels.resize(d.pixel_count());
    for (std::size_t i = 0; i < out.pixels.size(); ++i)
        out.pixels[i] = static_cast<std::uint16_t>(d.labels[i]);
    return out;
}

std::vector<std::int32_t> enforce_connectivity(int width, int height,
                                               std::vector<std::int32_t> labels) {
    const std::size_t n = static_cast<std::size_t>(width) * height;

    // Connected-component labelling: component id per pixel, plus size
    // and original label per component.
    std::vector<std::int32_t> comp(n, -1);
    std::vector<std::size_t> comp_size;
    std::vector<std::int32_t> comp_label;
    for (std::size_t p = 0; p < n; ++p) {
        if (comp[p] != -1) continue;
        const std::int32_t cid = static_cast<std::int32_t>(comp_size.size());
        const std::int32_t lab = labels[p];
        std::size_t count = 0;
        std::vector<std::size_t> stack{p};
        comp[p] = cid;
        while (!stack.empty()) {
            const std::size_t q = stack.back();
            stack.pop_back();
            ++count;
            const int x = static_cast<int>(q % width);
            const int y = static_cast<int>(q / width);
            const int nx[4] = {x - 1, x + 1, x, x};
            const int ny[4] = {y, y, y - 1, y + 1};
            for (int i = 0; i < 4; ++i) {
                if (nx[i] < 0 || nx[i] >= width || ny[i] < 0 || ny[i] >= height) continue;
                const std::size_t r = static_cast<std::size_t>(ny[i]) * width + nx[i];
                if (comp[r] == -1 && labels[r] == lab) {
                    comp[r] = cid;
                    stack.push_back(r);
                }
            }
        }
        comp_size.push_back(count);
        comp_label.push_back(lab);
    }

    // The largest component of each label keeps it; ties go to the
    // component appearing first in raster order.
    std::map<std::int32_t, std::int32_t> canonical;  // label -> component id
    for (std::int32_t c = 0; c < static_cast<std::int32_t>(comp_size.size()); ++c) {
        auto [it, inserted] = canonical.try_emplace(comp_label[c], c);
        if (!inserted && comp_size[c] > comp_size[it->second]) it->second = c;
    }
    std::vector<std::uint8_t> keeps(comp_size.size(), 0);
    for (const auto& [lab, c] : canonical) keeps[c] = 1;

    // Absorb each orphan component into the canonical neighbor whose
    // region is currently largest (ties: lowest label). Components whose
    // neighbors are all orphans too are retried until the map settles.
    std::vector<std::size_t> label_size;
    {
        std::int32_t max_label = 0;
        for (std::int32_t v : labels) max_label = std::max(max_label, v);
        label_size.assign(static_cast<std::size_t>(max_label) + 1, 0);
        for (const auto& [lab, c] : canonical) label_size[lab] = comp_size[c];
    }

    std::vector<std::int32_t> order;
    for (std::size_t p = 0; p < n; ++p)
        if (!keeps[comp[p]] && (order.empty() || order.back() != comp[p]))
            order.push_back(comp[p]);
    std::sort(order.begin(), order.end());
    order.erase(std::unique(order.begin(), order.end()), order.end());
    // Re-establish raster order of first appearance.
    {
        std::vector<std::int32_t> first(comp_size.size(), -1);
        std::int32_t rank = 0;
        for (std::size_t p = 0; p < n; ++p)
            if (first[comp[p]] == -1) first[comp[p]] = rank++;
        std::sort(order.begin(), order.end(),
                  [&](std::int32_t a, std::int32_t b) { return first[a] < first[b]; });
    }

    std::vector<std::vector<std::size_t>> comp_pixels(comp_size.size());
    for (std::size_t p = 0; p < n; ++p) comp_pixels[comp[p]].push_back(p);

    std::queue<std::int32_t> pending;
    for (std::int32_t c : order) pending.push(c);
    std::size_t stall = 0;
    while (!pending.empty()) {
        const std::int32_t c = pending.front();
        pending.pop();
        if (keeps[c]) continue;

        // Collect adjacent kept labels.
        std::int32_t best_label = -1;
        std::size_t best_size = 0;
        for (std::size_t q : comp_pixels[c]) {
            const int x = static_cast<int>(q % width);
            const int y = static_cast<int>(q / width);
            const int nx[4] = {x - 1, x + 1, x, x};
            const int ny[4] = {y, y, y - 1, y + 1};
            for (int i = 0; i < 4; ++i) {
                if (nx[i] < 0 || nx[i] >= width || ny[i] < 0 || ny[i] >= height) continue;
                const std::size_t r = static_cast<std::size_t>(ny[i]) * width + nx[i];
                if (!keeps[comp[r]]) continue;
                const std::int32_t lab = labels[r];
                if (lab == comp_label[c] && comp[r] == c) continue;
                if (label_size[lab] > best_size ||
                    (label_size[lab] == best_size && (best_label == -1 || lab < best_label))) {
                    best_size = label_size[lab];
                    best_label = lab;
                }
            }
        }
        if (best_label == -1) {
            // Neighbors were all orphans; retry after others resolve.
            pending.push(c);
            if (++stall > pending.size() * 2 + 4)
                fail(ErrorKind::FormatViolation,
                     "connectivity repair failed: isolated orphan components");
            continue;
        }
        stall = 0;
        for (std::size_t q : comp_pixels[c]) labels[q] = best_label;
        label_size[best_label] += comp_pixels[c].size();
        // The absorbed pixels now belong to the canonical component of
        // best_label for adjacency purposes.
        const std::int32_t target = canonical.at(best_label);
        for (std::size_t q : comp_pixels[c]) comp[q] = target;
        comp_pixels[target].insert(comp_pixels[target].end(), comp_pixels[c].begin(),
                                   comp_pixels[c].end());
        comp_pixels[c].clear();
        keeps[c] = 1;  // resolved
    }
    return labels;
}

}  // namespace dspm
