#include <algorithm>
#include <cmath>
#include <fstream>

#include "edgebin/datapipe.hpp"
#include "edgebin/rng.hpp"

namespace edgebin {

namespace {

void expect_image(const Tensor& t) {
    if (t.rank() != 3)
        throw Error(ErrorCode::ShapeMismatch, "expected HWC image, got " + t.shape_str());
    if (t.dtype() != DType::F32)
        throw Error(ErrorCode::DTypeMismatch, "expected f32 image");
}

// cos/sin in degrees, exact at the axis angles so that a 180-degree
// rotation is exactly the double flip
double cos_deg(double deg) {
    double m = std::fmod(std::fabs(deg), 360.0);
    if (m == 0.0) return 1.0;
    if (m == 90.0 || m == 270.0) return 0.0;
    if (m == 180.0) return -1.0;
    return std::cos(deg * 3.14159265358979323846 / 180.0);
}

double sin_deg(double deg) {
    double m = std::fmod(deg, 360.0);
    if (m == 0.0 || m == 180.0 || m == -180.0) return 0.0;
    if (m == 90.0 || m == -270.0) return 1.0;
    if (m == -90.0 || m == 270.0) return -1.0;
    return std::sin(deg * 3.14159265358979323846 / 180.0);
}

}  // namespace

Tensor load_image(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::Io, "cannot open " + path.string());

    std::string magic;
    f >> magic;
    if (magic != "P6") throw Error(ErrorCode::BadMagic, path.string() + " is not a P6 pixmap");

    auto next_int = [&]() -> int {
        // skip whitespace and '#' comment lines
        int c = f.peek();
        while (c != EOF && (std::isspace(c) || c == '#')) {
            if (c == '#') {
                std::string line;
                std::getline(f, line);
            } else {
                f.get();
            }
            c = f.peek();
        }
        int v;
        if (!(f >> v)) throw Error(ErrorCode::BadMagic, "malformed pixmap header");
        return v;
    };

    int w = next_int();
    int h = next_int();
    int maxval = next_int();
    if (w <= 0 || h <= 0) throw Error(ErrorCode::BadMagic, "non-positive pixmap dimensions");
    if (maxval != 255)
        throw Error(ErrorCode::BadMagic, "only 8-bit pixmaps supported, maxval=" +
                                             std::to_string(maxval));
    f.get();  // single whitespace after maxval

    std::vector<uint8_t> bytes(static_cast<size_t>(w) * h * 3);
    f.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (f.gcount() != static_cast<std::streamsize>(bytes.size()))
        throw Error(ErrorCode::TruncatedPixels,
                    path.string() + ": expected " + std::to_string(bytes.size()) +
                        " pixel bytes, got " + std::to_string(f.gcount()));

    Tensor out = Tensor::f32({h, w, 3});
    float* dst = out.f32_data();
    for (size_t i = 0; i < bytes.size(); ++i) dst[i] = static_cast<float>(bytes[i]) / 255.0f;
    return out;
}

void save_image(const Tensor& image, const std::filesystem::path& path) {
    expect_image(image);
    if (image.dim(2) != 3)
        throw Error(ErrorCode::ShapeMismatch, "pixmap writer needs 3 channels");
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    f << "P6\n" << image.dim(1) << " " << image.dim(0) << "\n255\n";
    const float* src = image.f32_data();
    const int64_t n = image.elem_count();
    std::vector<uint8_t> bytes(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
        float v = std::clamp(src[i], 0.0f, 1.0f);
        bytes[static_cast<size_t>(i)] =
            static_cast<uint8_t>(std::lround(static_cast<double>(v) * 255.0));
    }
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error(ErrorCode::Io, "short write to " + path.string());
}

Tensor resize_bilinear(const Tensor& image, int out_w, int out_h) {
    expect_image(image);
    if (out_w <= 0 || out_h <= 0)
        throw Error(ErrorCode::InvalidArgument, "resize target must be positive");
    const int ih = image.dim(0), iw = image.dim(1), c = image.dim(2);
    Tensor out = Tensor::f32({out_h, out_w, c});
    const float* src = image.f32_data();
    float* dst = out.f32_data();

    const double sy = static_cast<double>(ih) / out_h;
    const double sx = static_cast<double>(iw) / out_w;

    for (int oy = 0; oy < out_h; ++oy) {
        double fy = (oy + 0.5) * sy - 0.5;
        int y0 = static_cast<int>(std::floor(fy));
        double wy = fy - y0;
        int y0c = std::clamp(y0, 0, ih - 1);
        int y1c = std::clamp(y0 + 1, 0, ih - 1);
        for (int ox = 0; ox < out_w; ++ox) {
            double fx = (ox + 0.5) * sx - 0.5;
            int x0 = static_cast<int>(std::floor(fx));
            double wx = fx - x0;
            int x0c = std::clamp(x0, 0, iw - 1);
            int x1c = std::clamp(x0 + 1, 0, iw - 1);
            const float* p00 = src + (static_cast<int64_t>(y0c) * iw + x0c) * c;
            const float* p01 = src + (static_cast<int64_t>(y0c) * iw + x1c) * c;
            const float* p10 = src + (static_cast<int64_t>(y1c) * iw + x0c) * c;
            const float* p11 = src + (static_cast<int64_t>(y1c) * iw + x1c) * c;
            float* o = dst + (static_cast<int64_t>(oy) * out_w + ox) * c;
            for (int ch = 0; ch < c; ++ch) {
                double top = (1.0 - wx) * p00[ch] + wx * p01[ch];
                double bot = (1.0 - wx) * p10[ch] + wx * p11[ch];
                o[ch] = static_cast<float>((1.0 - wy) * top + wy * bot);
            }
        }
    }
    return out;
}

Tensor flip_horizontal(const Tensor& image) {
    expect_image(image);
    const int h = image.dim(0), w = image.dim(1), c = image.dim(2);
    Tensor out = Tensor::f32(image.shape());
    const float* src = image.f32_data();
    float* dst = out.f32_data();
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            std::copy_n(src + (static_cast<int64_t>(y) * w + (w - 1 - x)) * c, c,
                        dst + (static_cast<int64_t>(y) * w + x) * c);
    return out;
}

Tensor flip_vertical(const Tensor& image) {
    expect_image(image);
    const int h = image.dim(0), w = image.dim(1), c = image.dim(2);
    Tensor out = Tensor::f32(image.shape());
    const float* src = image.f32_data();
    float* dst = out.f32_data();
    for (int y = 0; y < h; ++y)
        std::copy_n(src + static_cast<int64_t>(h - 1 - y) * w * c, static_cast<int64_t>(w) * c,
                    dst + static_cast<int64_t>(y) * w * c);
    return out;
}

Tensor warp_affine(const Tensor& image, const std::array<double, 4>& m, double tx, double ty) {
    expect_image(image);
    const int h = image.dim(0), w = image.dim(1), c = image.dim(2);
    Tensor out = Tensor::f32(image.shape());
    const float* src = image.f32_data();
    float* dst = out.f32_data();
    const double cx = (w - 1) / 2.0;
    const double cy = (h - 1) / 2.0;

    auto sample = [&](int y, int x, int ch) -> double {
        if (y < 0 || y >= h || x < 0 || x >= w) return 0.0;  // zero fill out of frame
        return src[(static_cast<int64_t>(y) * w + x) * c + ch];
    };

    for (int oy = 0; oy < h; ++oy) {
        for (int ox = 0; ox < w; ++ox) {
            double dx = ox - cx;
            double dy = oy - cy;
            double sxf = m[0] * dx + m[1] * dy + cx - tx;
            double syf = m[2] * dx + m[3] * dy + cy - ty;
            int x0 = static_cast<int>(std::floor(sxf));
            int y0 = static_cast<int>(std::floor(syf));
            double wx = sxf - x0;
            double wy = syf - y0;
            float* o = dst + (static_cast<int64_t>(oy) * w + ox) * c;
            for (int ch = 0; ch < c; ++ch) {
                double top = (1.0 - wx) * sample(y0, x0, ch) + wx * sample(y0, x0 + 1, ch);
                double bot = (1.0 - wx) * sample(y0 + 1, x0, ch) + wx * sample(y0 + 1, x0 + 1, ch);
                double v = (1.0 - wy) * top + wy * bot;
                o[ch] = static_cast<float>(std::clamp(v, 0.0, 1.0));
            }
        }
    }
    return out;
}

AugmentConfig jetson_augment_config() {
    AugmentConfig c;
    c.flip = FlipMode::Both;
    c.max_rotation_deg = 180.0;
    c.max_translation_frac = 0.10;
    c.max_zoom_frac = 0.75;
    return c;
}

AugmentConfig k210_augment_config() {
    AugmentConfig c;
    c.flip = FlipMode::None;
    c.max_rotation_deg = 180.0;
    c.max_translation_frac = 0.20;
    c.max_shear_frac = 0.50;
    return c;
}

Tensor augment(const Tensor& image, const AugmentConfig& config, uint64_t draw_seed) {
    expect_image(image);
    if (config.max_rotation_deg < 0.0 || config.max_rotation_deg > 180.0)
        throw Error(ErrorCode::InvalidArgument, "rotation bound outside [0,180]");
    for (double f :
         {config.max_translation_frac, config.max_zoom_frac, config.max_shear_frac})
        if (f < 0.0 || f > 1.0)
            throw Error(ErrorCode::InvalidArgument, "augment fractions must be in [0,1]");

    Rng rng(derive_seed(config.seed, draw_seed));

    bool flip_h = false, flip_v = false;
    if (config.flip == FlipMode::Horizontal || config.flip == FlipMode::Both)
        flip_h = rng.next_double() < 0.5;
    if (config.flip == FlipMode::Vertical || config.flip == FlipMode::Both)
        flip_v = rng.next_double() < 0.5;

    double angle = config.max_rotation_deg == 0.0
                       ? 0.0
                       : rng.uniform(-config.max_rotation_deg, config.max_rotation_deg);
    double zoom = config.max_zoom_frac == 0.0
                      ? 1.0
                      : rng.uniform(1.0 - config.max_zoom_frac, 1.0 + config.max_zoom_frac);
    double shear = config.max_shear_frac == 0.0
                       ? 0.0
                       : rng.uniform(-config.max_shear_frac, config.max_shear_frac);
    double tx = 0.0, ty = 0.0;
    if (config.max_translation_frac != 0.0) {
        tx = rng.uniform(-config.max_translation_frac, config.max_translation_frac) *
             image.dim(1);
        ty = rng.uniform(-config.max_translation_frac, config.max_translation_frac) *
             image.dim(0);
    }

    Tensor out = image;
    if (flip_h) out = flip_horizontal(out);
    if (flip_v) out = flip_vertical(out);

    bool identity =
        angle == 0.0 && zoom == 1.0 && shear == 0.0 && tx == 0.0 && ty == 0.0;
    if (identity) return out;

    // inverse map: output -> source is rotate(-angle) * shear(-s) / zoom
    double ca = cos_deg(angle);
    double sa = sin_deg(angle);
    double inv_zoom = 1.0 / zoom;
    // forward = R(angle) * Shear(shear) * zoom; build the inverse directly
    std::array<double, 4> rot_inv{ca, sa, -sa, ca};
    std::array<double, 4> shear_inv{1.0, -shear, 0.0, 1.0};
    std::array<double, 4> m{};
    // m = shear_inv * rot_inv, then scale by 1/zoom
    m[0] = (shear_inv[0] * rot_inv[0] + shear_inv[1] * rot_inv[2]) * inv_zoom;
    m[1] = (shear_inv[0] * rot_inv[1] + shear_inv[1] * rot_inv[3]) * inv_zoom;
    m[2] = (shear_inv[2] * rot_inv[0] + shear_inv[3] * rot_inv[2]) * inv_zoom;
    m[3] = (shear_inv[2] * rot_inv[1] + shear_inv[3] * rot_inv[3]) * inv_zoom;
    return warp_affine(out, m, tx, ty);
}

}  // namespace edgebin
