#include "angio/io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include <png.h>

namespace angio {

namespace {

constexpr float kFlowMagic = 202021.25f;

uint32_t read_le32(const unsigned char* b) {
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void write_le32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t float_bits(float f) {
    uint32_t u;
    std::memcpy(&u, &f, 4);
    return u;
}

float bits_float(uint32_t u) {
    float f;
    std::memcpy(&f, &u, 4);
    return f;
}

std::vector<unsigned char> read_all(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    in.seekg(0, std::ios::end);
    const std::streamoff n = in.tellg();
    in.seekg(0, std::ios::beg);
    std::vector<unsigned char> buf(static_cast<size_t>(n));
    if (n > 0) in.read(reinterpret_cast<char*>(buf.data()), n);
    if (!in) throw DataError("read failure: " + path);
    return buf;
}

// ---- PGM (P5) ----

// Skips whitespace and '#' comments between header tokens.
bool next_pgm_token(const std::vector<unsigned char>& buf, size_t& pos, std::string& tok) {
    while (pos < buf.size()) {
        const char c = static_cast<char>(buf[pos]);
        if (c == '#') {
            while (pos < buf.size() && buf[pos] != '\n') ++pos;
        } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            ++pos;
        } else {
            break;
        }
    }
    tok.clear();
    while (pos < buf.size()) {
        const char c = static_cast<char>(buf[pos]);
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '#') break;
        tok.push_back(c);
        ++pos;
    }
    return !tok.empty();
}

long parse_pgm_int(const std::string& tok, const char* what) {
    for (char c : tok)
        if (c < '0' || c > '9') throw FormatError(std::string("bad PGM ") + what);
    if (tok.size() > 9) throw FormatError(std::string("bad PGM ") + what);
    return std::strtol(tok.c_str(), nullptr, 10);
}

Image load_pgm(const std::vector<unsigned char>& buf, const std::string& path) {
    size_t pos = 2; // past "P5"
    std::string tok;
    if (!next_pgm_token(buf, pos, tok)) throw FormatError("truncated PGM header: " + path);
    const long w = parse_pgm_int(tok, "width");
    if (!next_pgm_token(buf, pos, tok)) throw FormatError("truncated PGM header: " + path);
    const long h = parse_pgm_int(tok, "height");
    if (!next_pgm_token(buf, pos, tok)) throw FormatError("truncated PGM header: " + path);
    const long maxval = parse_pgm_int(tok, "maxval");
    if (w <= 0 || h <= 0) throw FormatError("bad PGM dimensions: " + path);
    if (maxval != 255)
        throw FormatError("unsupported PGM bit depth (maxval must be 255): " + path);
    if (pos >= buf.size()) throw FormatError("truncated PGM payload: " + path);
    const char sep = static_cast<char>(buf[pos]);
    if (sep != ' ' && sep != '\t' && sep != '\r' && sep != '\n')
        throw FormatError("malformed PGM header: " + path);
    ++pos; // single whitespace byte after maxval
    const size_t need = static_cast<size_t>(w) * static_cast<size_t>(h);
    if (buf.size() - pos < need) throw FormatError("truncated PGM payload: " + path);
    Plane p(static_cast<int>(h), static_cast<int>(w));
    for (size_t i = 0; i < need; ++i)
        p[i] = static_cast<double>(buf[pos + i]) / 255.0;
    return Image(std::move(p));
}

// ---- PNG (8-bit grayscale) via libpng ----

struct PngReadState {
    const unsigned char* data;
    size_t size;
    size_t pos;
};

void png_mem_read(png_structp png, png_bytep out, png_size_t n) {
    auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
    if (st->pos + n > st->size) png_error(png, "unexpected end of PNG data");
    std::memcpy(out, st->data + st->pos, n);
    st->pos += n;
}

Image load_png(const std::vector<unsigned char>& buf, const std::string& path) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw DataError("libpng init failure");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw DataError("libpng init failure");
    }
    std::vector<png_bytep> row_ptrs;
    std::vector<unsigned char> pixels;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("invalid PNG file: " + path);
    }
    PngReadState st{buf.data(), buf.size(), 0};
    png_set_read_fn(png, &st, png_mem_read);
    png_read_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);
    if (color_type != PNG_COLOR_TYPE_GRAY || bit_depth != 8) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("unsupported PNG (need 8-bit grayscale): " + path);
    }
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    pixels.resize(static_cast<size_t>(w) * h);
    row_ptrs.resize(h);
    for (png_uint_32 y = 0; y < h; ++y)
        row_ptrs[y] = pixels.data() + static_cast<size_t>(y) * w;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Plane p(static_cast<int>(h), static_cast<int>(w));
    for (size_t i = 0; i < p.size(); ++i)
        p[i] = static_cast<double>(pixels[i]) / 255.0;
    return Image(std::move(p));
}

void save_png(const Image& img, const std::string& path) {
    FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw DataError("cannot open for writing: " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        std::fclose(fp);
        throw DataError("libpng init failure");
    }
    std::vector<unsigned char> bytes(img.size());
    std::vector<png_bytep> row_ptrs(img.height());
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw DataError("PNG write failure: " + path);
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, img.width(), img.height(), 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (size_t i = 0; i < img.size(); ++i)
        bytes[i] = static_cast<unsigned char>(quantize8(img[i]));
    for (int y = 0; y < img.height(); ++y)
        row_ptrs[y] = bytes.data() + static_cast<size_t>(y) * img.width();
    png_write_image(png, row_ptrs.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fclose(fp) != 0) throw DataError("PNG close failure: " + path);
}

bool has_suffix(const std::string& s, const std::string& suf) {
    if (s.size() < suf.size()) return false;
    std::string tail = s.substr(s.size() - suf.size());
    std::transform(tail.begin(), tail.end(), tail.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return tail == suf;
}

} // namespace

Image load_frame(const std::string& path) {
    const std::vector<unsigned char> buf = read_all(path);
    if (buf.size() >= 2 && buf[0] == 'P' && buf[1] == '5') return load_pgm(buf, path);
    static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    if (buf.size() >= 8 && std::memcmp(buf.data(), png_sig, 8) == 0)
        return load_png(buf, path);
    throw FormatError("unsupported frame format (need P5 PGM or PNG): " + path);
}

void save_frame(const Image& img, const std::string& path) {
    if (has_suffix(path, ".png")) {
        save_png(img, path);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "P5\n" << img.width() << " " << img.height() << "\n255\n";
    std::vector<unsigned char> bytes(img.size());
    for (size_t i = 0; i < img.size(); ++i)
        bytes[i] = static_cast<unsigned char>(quantize8(img[i]));
    out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    if (!out) throw DataError("write failure: " + path);
}

FlowField read_flow(const std::string& path) {
    const std::vector<unsigned char> buf = read_all(path);
    if (buf.size() < 12) throw FormatError("truncated .flo header: " + path);
    const float magic = bits_float(read_le32(buf.data()));
    if (magic != kFlowMagic) throw FormatError("bad .flo magic number: " + path);
    const uint32_t w = read_le32(buf.data() + 4);
    const uint32_t h = read_le32(buf.data() + 8);
    if (w == 0 || h == 0 || w > 1u << 20 || h > 1u << 20)
        throw FormatError("bad .flo dimensions: " + path);
    const size_t need = 12 + static_cast<size_t>(w) * h * 8;
    if (buf.size() != need) throw FormatError(".flo size mismatch: " + path);
    Plane u(static_cast<int>(h), static_cast<int>(w));
    Plane v(static_cast<int>(h), static_cast<int>(w));
    size_t off = 12;
    for (size_t i = 0; i < static_cast<size_t>(w) * h; ++i) {
        u[i] = static_cast<double>(bits_float(read_le32(buf.data() + off)));
        v[i] = static_cast<double>(bits_float(read_le32(buf.data() + off + 4)));
        off += 8;
    }
    return FlowField(std::move(u), std::move(v));
}

void write_flow(const FlowField& flow, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    write_le32(out, float_bits(kFlowMagic));
    write_le32(out, static_cast<uint32_t>(flow.width()));
    write_le32(out, static_cast<uint32_t>(flow.height()));
    for (size_t i = 0; i < flow.size(); ++i) {
        write_le32(out, float_bits(static_cast<float>(flow.u()[i])));
        write_le32(out, float_bits(static_cast<float>(flow.v()[i])));
    }
    if (!out) throw DataError("write failure: " + path);
}

DepthMap read_depth(const std::string& path) {
    const FlowField f = read_flow(path);
    Plane d(f.height(), f.width());
    for (size_t i = 0; i < f.size(); ++i) d[i] = f.u()[i];
    return DepthMap(std::move(d)); // DomainError if any value <= 0
}

void write_depth(const DepthMap& depth, const std::string& path) {
    Plane u(depth.height(), depth.width());
    for (size_t i = 0; i < u.size(); ++i) u[i] = depth[i];
    write_flow(FlowField(std::move(u), Plane(depth.height(), depth.width(), 0.0)), path);
}

std::vector<std::string> list_frame_files(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir);
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string p = entry.path().string();
        if (has_suffix(p, ".pgm") || has_suffix(p, ".png")) files.push_back(p);
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::vector<Image> load_frame_dir(const std::string& dir) {
    std::vector<Image> frames;
    for (const auto& f : list_frame_files(dir)) frames.push_back(load_frame(f));
    if (frames.empty()) throw DataError("no frames found in: " + dir);
    return frames;
}

} // namespace angio
