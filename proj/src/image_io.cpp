#include "tcpde/image_io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tcpde/errors.hpp"

#ifdef TCPDE_HAVE_PNG
#include <png.h>
#include <csetjmp>
#endif

namespace tcpde {

std::uint8_t quantize_u8(double v) {
    v = std::min(std::max(v, 0.0), 255.0);
    return static_cast<std::uint8_t>(std::floor(v + 0.5));
}

bool png_supported() {
#ifdef TCPDE_HAVE_PNG
    return true;
#else
    return false;
#endif
}

namespace {

/// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in, const std::string& origin) {
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (!std::isspace(c)) {
            break;
        }
        c = in.get();
    }
    if (c == EOF)
        throw IoError(origin + ": truncated PGM header");
    std::string tok;
    while (c != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    if (c != EOF) in.unget();
    return tok;
}

int parse_header_int(std::istream& in, const std::string& origin, const char* what) {
    const std::string tok = next_token(in, origin);
    try {
        std::size_t pos = 0;
        const int v = std::stoi(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw IoError(origin + ": bad PGM " + what + " '" + tok + "'");
    }
}

bool has_suffix(const std::string& s, const std::string& suffix) {
    if (s.size() < suffix.size()) return false;
    for (std::size_t i = 0; i < suffix.size(); ++i) {
        const char a = static_cast<char>(std::tolower(s[s.size() - suffix.size() + i]));
        if (a != suffix[i]) return false;
    }
    return true;
}

#ifdef TCPDE_HAVE_PNG

ImageGrid load_png(const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw IoError(path + ": cannot open file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw IoError(path + ": libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw IoError(path + ": libpng decode error");
    }

    png_init_io(png, fp);
    png_read_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);

    if (color != PNG_COLOR_TYPE_GRAY) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw IoError(path + ": grayscale required (color PNG not supported)");
    }
    if (depth != 8) {
        if (depth < 8) {
            png_set_expand_gray_1_2_4_to_8(png);
        } else {
            png_destroy_read_struct(&png, &info, nullptr);
            std::fclose(fp);
            throw IoError(path + ": only 8-bit grayscale PNG is supported");
        }
    }
    png_read_update_info(png, info);

    ImageGrid g(static_cast<int>(w), static_cast<int>(h));
    std::vector<png_byte> row(w);
    for (png_uint_32 j = 0; j < h; ++j) {
        png_read_row(png, row.data(), nullptr);
        for (png_uint_32 i = 0; i < w; ++i)
            g(static_cast<int>(i), static_cast<int>(j)) = static_cast<double>(row[i]);
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    return g;
}

void save_png(const ImageGrid& g, const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw IoError(path + ": cannot open file for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError(path + ": libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError(path + ": libpng encode error");
    }

    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(g.width()),
                 static_cast<png_uint_32>(g.height()), 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<png_byte> row(static_cast<std::size_t>(g.width()));
    for (int j = 0; j < g.height(); ++j) {
        for (int i = 0; i < g.width(); ++i) row[static_cast<std::size_t>(i)] = quantize_u8(g(i, j));
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

#endif  // TCPDE_HAVE_PNG

}  // namespace

ImageGrid load_pgm(std::istream& in, const std::string& origin) {
    const std::string magic = next_token(in, origin);
    if (magic != "P2" && magic != "P5")
        throw IoError(origin + ": unsupported format (expected PGM magic P2 or P5, got '" +
                      magic + "')");

    const int width = parse_header_int(in, origin, "width");
    const int height = parse_header_int(in, origin, "height");
    const int maxval = parse_header_int(in, origin, "maxval");
    if (width < 1 || height < 1)
        throw IoError(origin + ": bad PGM dimensions");
    if (maxval < 1 || maxval > 255)
        throw IoError(origin + ": only 8-bit PGM supported (maxval " +
                      std::to_string(maxval) + ")");

    ImageGrid g(width, height);
    if (magic == "P2") {
        for (int j = 0; j < height; ++j)
            for (int i = 0; i < width; ++i) {
                const int v = parse_header_int(in, origin, "pixel");
                if (v < 0 || v > maxval)
                    throw IoError(origin + ": pixel value " + std::to_string(v) +
                                  " outside [0, maxval]");
                g(i, j) = static_cast<double>(v);
            }
    } else {
        in.get();  // the single whitespace byte after maxval
        std::vector<char> row(static_cast<std::size_t>(width));
        for (int j = 0; j < height; ++j) {
            in.read(row.data(), width);
            if (in.gcount() != width)
                throw IoError(origin + ": truncated P5 pixel data");
            for (int i = 0; i < width; ++i)
                g(i, j) = static_cast<double>(static_cast<unsigned char>(row[static_cast<std::size_t>(i)]));
        }
    }
    return g;
}

void save_pgm(const ImageGrid& g, std::ostream& out, const std::string& comment) {
    out << "P5\n";
    if (!comment.empty()) {
        std::string clean = comment;
        for (char& c : clean)
            if (c == '\n' || c == '\r') c = ' ';
        out << "# " << clean << "\n";
    }
    out << g.width() << " " << g.height() << "\n255\n";
    std::vector<char> row(static_cast<std::size_t>(g.width()));
    for (int j = 0; j < g.height(); ++j) {
        for (int i = 0; i < g.width(); ++i)
            row[static_cast<std::size_t>(i)] = static_cast<char>(quantize_u8(g(i, j)));
        out.write(row.data(), g.width());
    }
    if (!out)
        throw IoError("PGM write failed");
}

ImageGrid load_image(const std::string& path) {
    if (has_suffix(path, ".png")) {
#ifdef TCPDE_HAVE_PNG
        return load_png(path);
#else
        throw IoError(path + ": PNG support not compiled in (use PGM)");
#endif
    }
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError(path + ": cannot open file");
    return load_pgm(in, path);
}

void save_image(const ImageGrid& g, const std::string& path, const std::string& comment) {
    if (has_suffix(path, ".png")) {
#ifdef TCPDE_HAVE_PNG
        save_png(g, path);
        return;
#else
        throw IoError(path + ": PNG support not compiled in (use PGM)");
#endif
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError(path + ": cannot open file for writing");
    save_pgm(g, out, comment);
    if (!out)
        throw IoError(path + ": write failed");
}

}  // namespace tcpde
