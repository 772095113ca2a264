#include "dspm/viz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dspm/error.hpp"

namespace dspm {

namespace {

// The usual optical-flow color wheel: six hue arcs (red-yellow, yellow-green,
// green-cyan, cyan-blue, blue-magenta, magenta-red) with uneven arc lengths.
struct ColorWheel {
    static constexpr int kRY = 15, kYG = 6, kGC = 4, kCB = 11, kBM = 13, kMR = 6;
    static constexpr int kSize = kRY + kYG + kGC + kCB + kBM + kMR;
    double r[kSize], g[kSize], b[kSize];

    ColorWheel() {
        int i = 0;
        for (int k = 0; k < kRY; ++k, ++i) set(i, 255, 255.0 * k / kRY, 0);
        for (int k = 0; k < kYG; ++k, ++i) set(i, 255 - 255.0 * k / kYG, 255, 0);
        for (int k = 0; k < kGC; ++k, ++i) set(i, 0, 255, 255.0 * k / kGC);
        for (int k = 0; k < kCB; ++k, ++i) set(i, 0, 255 - 255.0 * k / kCB, 255);
        for (int k = 0; k < kBM; ++k, ++i) set(i, 255.0 * k / kBM, 0, 255);
        for (int k = 0; k < kMR; ++k, ++i) set(i, 255, 0, 255 - 255.0 * k / kMR);
    }
    void set(int i, double rr, double gg, double bb) {
        r[i] = rr;
        g[i] = gg;
        b[i] = bb;
    }
};

const ColorWheel& wheel() {
    static const ColorWheel w;
    return w;
}

std::uint8_t to_u8(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0l, 255l));
}

// 5x7 glyphs for accuracy annotations; each row is 5 bits, MSB left.
const std::uint8_t* glyph(char c) {
    static const std::uint8_t digits[10][7] = {
        {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E},  // 0
        {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},  // 1
        {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F},  // 2
        {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},  // 3
        {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02},  // 4
        {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},  // 5
        {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E},  // 6
        {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},  // 7
        {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E},  // 8
        {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C},  // 9
    };
    static const std::uint8_t dot[7] = {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C};
    static const std::uint8_t percent[7] = {0x18, 0x19, 0x02, 0x04, 0x08, 0x13, 0x03};
    static const std::uint8_t dash[7] = {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00};
    static const std::uint8_t blank[7] = {0, 0, 0, 0, 0, 0, 0};
    if (c >= '0' && c <= '9') return digits[c - '0'];
    if (c == '.') return dot;
    if (c == '%') return percent;
    if (c == '-') return dash;
    return blank;
}

}  // namespace

void flow_color(double dx, double dy, double max_norm, std::uint8_t rgb[3]) {
    const ColorWheel& w = wheel();
    const double norm = std::hypot(dx, dy);
    const double radius = max_norm > 0.0 ? std::min(norm / max_norm, 1.0) : 0.0;
    const double angle = std::atan2(-dy, -dx) / 3.14159265358979323846;  // [-1, 1]
    const double fk = (angle + 1.0) / 2.0 * (ColorWheel::kSize - 1);
    const int k0 = static_cast<int>(fk);
    const int k1 = (k0 + 1) % ColorWheel::kSize;
    const double f = fk - k0;
    const double cols[3] = {w.r[k0] + f * (w.r[k1] - w.r[k0]),
                            w.g[k0] + f * (w.g[k1] - w.g[k0]),
                            w.b[k0] + f * (w.b[k1] - w.b[k0])};
    for (int c = 0; c < 3; ++c) {
        const double unit = cols[c] / 255.0;
        rgb[c] = to_u8(255.0 * (1.0 - radius * (1.0 - unit)));
    }
}

RgbImage render_displacement(const Decomposition& query,
                             const std::vector<MatchRecord>& matches,
                             const std::vector<const Decomposition*>& library) {
    std::vector<Vec2> disp(static_cast<std::size_t>(query.k), {0.0, 0.0});
    std::vector<double> best(static_cast<std::size_t>(query.k),
                             std::numeric_limits<double>::infinity());
    std::vector<bool> has(static_cast<std::size_t>(query.k), false);
    for (const MatchRecord& r : matches) {
        if (r.src < 0 || r.src >= query.k)
            fail(ErrorKind::FormatViolation, "match source superpixel out of range");
        if (r.lib_image < 0 || r.lib_image >= static_cast<std::int32_t>(library.size()))
            fail(ErrorKind::FormatViolation, "match library image out of range");
        const Decomposition& lib = *library[r.lib_image];
        if (r.lib_sp < 0 || r.lib_sp >= lib.k)
            fail(ErrorKind::FormatViolation, "match library superpixel out of range");
        if (r.distance < best[r.src]) {
            best[r.src] = r.distance;
            disp[r.src] = lib.barycenters[r.lib_sp] - query.barycenters[r.src];
            has[r.src] = true;
        }
    }
    double max_norm = 0.0;
    for (std::int32_t i = 0; i < query.k; ++i)
        if (has[i]) max_norm = std::max(max_norm, disp[i].norm());

    RgbImage out(query.width, query.height);
    for (int y = 0; y < query.height; ++y) {
        for (int x = 0; x < query.width; ++x) {
            const std::int32_t id = query.label_at(x, y);
            if (!has[id]) continue;  // stays black
            std::uint8_t rgb[3];
            flow_color(disp[id].x, disp[id].y, max_norm, rgb);
            out.at(x, y, 0) = rgb[0];
            out.at(x, y, 1) = rgb[1];
            out.at(x, y, 2) = rgb[2];
        }
    }
    return out;
}

void class_color(int cls, std::uint8_t rgb[3]) {
    static const std::uint8_t palette[12][3] = {
        {230, 60, 60},  {60, 120, 230}, {70, 200, 90},   {240, 200, 60},
        {180, 80, 220}, {70, 210, 210}, {250, 140, 50},  {150, 150, 150},
        {120, 70, 30},  {230, 120, 80}, {100, 100, 230}, {40, 140, 70}};
    const int idx = ((cls % 12) + 12) % 12;
    rgb[0] = palette[idx][0];
    rgb[1] = palette[idx][1];
    rgb[2] = palette[idx][2];
}

RgbImage render_label_overlay(const RgbImage& image, const Decomposition& d,
                              const std::vector<std::int32_t>& classes,
                              const std::string& annotation) {
    if (image.width != d.width || image.height != d.height)
        fail(ErrorKind::BadParameter, "image and decomposition dimensions differ");
    if (static_cast<int>(classes.size()) != d.k)
        fail(ErrorKind::BadParameter, "one class per superpixel required");
    RgbImage out(image.width, image.height);
    for (int y = 0; y < d.height; ++y) {
        for (int x = 0; x < d.width; ++x) {
            const std::int32_t id = d.label_at(x, y);
            std::uint8_t rgb[3];
            class_color(classes[id], rgb);
            const bool boundary = (x + 1 < d.width && d.label_at(x + 1, y) != id) ||
                                  (y + 1 < d.height && d.label_at(x, y + 1) != id);
            for (int c = 0; c < 3; ++c) {
                double v = 0.5 * image.at(x, y, c) + 0.5 * rgb[c];
                if (boundary) v *= 0.35;
                out.at(x, y, c) = to_u8(v);
            }
        }
    }
    // Stamp the annotation at 2x scale with a dark backing box.
    const int scale = 2, cw = 6 * scale, ch = 8 * scale, ox = 4, oy = 4;
    const int box_w = static_cast<int>(annotation.size()) * cw + 4;
    for (int y = oy - 2; y < oy + ch && y < out.height; ++y) {
        for (int x = ox - 2; x < ox + box_w && x < out.width; ++x) {
            if (x < 0 || y < 0) continue;
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = out.at(x, y, c) / 4;
        }
    }
    for (std::size_t i = 0; i < annotation.size(); ++i) {
        const std::uint8_t* rows = glyph(annotation[i]);
        for (int ry = 0; ry < 7; ++ry) {
            for (int rx = 0; rx < 5; ++rx) {
                if (!(rows[ry] & (0x10 >> rx))) continue;
                for (int sy = 0; sy < scale; ++sy) {
                    for (int sx = 0; sx < scale; ++sx) {
                        const int px = ox + static_cast<int>(i) * cw + rx * scale + sx;
                        const int py = oy + ry * scale + sy;
                        if (px < 0 || px >= out.width || py < 0 || py >= out.height)
                            continue;
                        out.at(px, py, 0) = 255;
                        out.at(px, py, 1) = 255;
                        out.at(px, py, 2) = 255;
                    }
                }
            }
        }
    }
    return out;
}

}  // namespace dspm
