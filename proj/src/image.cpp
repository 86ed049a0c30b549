#include "ace/image.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace ace {

ImageBuffer::ImageBuffer(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3) {
    for (std::size_t i = 0; i < pixels.size(); i += 3) {
        pixels[i] = r;
        pixels[i + 1] = g;
        pixels[i + 2] = b;
    }
}

void ImageBuffer::fill_rect(int x0, int y0, int w, int h, std::uint8_t r, std::uint8_t g,
                            std::uint8_t b) {
    const int x1 = std::min(x0 + w, width);
    const int y1 = std::min(y0 + h, height);
    for (int y = std::max(0, y0); y < y1; ++y) {
        for (int x = std::max(0, x0); x < x1; ++x) {
            std::uint8_t* p = at(x, y);
            p[0] = r;
            p[1] = g;
            p[2] = b;
        }
    }
}

std::size_t BinaryMask::count() const {
    std::size_t n = 0;
    for (std::uint8_t b : bits) {
        n += b;
    }
    return n;
}

RgbaPatch resize_nearest(const RgbaPatch& patch, int w, int h) {
    if (!patch.valid() || w <= 0 || h <= 0) {
        throw ShapeError("resize_nearest: invalid patch or target size");
    }
    RgbaPatch out(w, h);
    for (int y = 0; y < h; ++y) {
        const int sy = std::min(patch.height - 1, y * patch.height / h);
        for (int x = 0; x < w; ++x) {
            const int sx = std::min(patch.width - 1, x * patch.width / w);
            const std::uint8_t* s = patch.at(sx, sy);
            std::uint8_t* d = out.at(x, y);
            std::copy(s, s + 4, d);
        }
    }
    return out;
}

namespace {

// Reads one whitespace/comment-delimited token from a netpbm header.
std::string next_header_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) {
                return tok;
            }
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    if (tok.empty()) {
        throw IoError("truncated netpbm header");
    }
    return tok;
}

int parse_dim(const std::string& tok) {
    std::size_t pos = 0;
    int v = 0;
    try {
        v = std::stoi(tok, &pos);
    } catch (const std::exception&) {
        throw IoError("bad netpbm header field '" + tok + "'");
    }
    if (pos != tok.size() || v <= 0) {
        throw IoError("bad netpbm header field '" + tok + "'");
    }
    return v;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    return out;
}

}  // namespace

ImageBuffer read_ppm(const std::string& path) {
    auto in = open_in(path);
    if (next_header_token(in) != "P6") {
        throw IoError(path + ": not a binary PPM (P6)");
    }
    ImageBuffer img;
    img.width = parse_dim(next_header_token(in));
    img.height = parse_dim(next_header_token(in));
    if (parse_dim(next_header_token(in)) != 255) {
        throw IoError(path + ": only maxval 255 supported");
    }
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height * 3);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
        throw IoError(path + ": truncated pixel data");
    }
    return img;
}

void write_ppm(const ImageBuffer& image, const std::string& path) {
    if (!image.valid()) {
        throw ShapeError("write_ppm: invalid image");
    }
    auto out = open_out(path);
    out << "P6\n" << image.width << " " << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()),
              static_cast<std::streamsize>(image.pixels.size()));
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

BinaryMask read_pbm(const std::string& path) {
    auto in = open_in(path);
    if (next_header_token(in) != "P4") {
        throw IoError(path + ": not a binary PBM (P4)");
    }
    BinaryMask mask;
    mask.width = parse_dim(next_header_token(in));
    mask.height = parse_dim(next_header_token(in));
    mask.bits.assign(static_cast<std::size_t>(mask.width) * mask.height, 0);
    const int row_bytes = (mask.width + 7) / 8;
    std::vector<std::uint8_t> row(row_bytes);
    for (int y = 0; y < mask.height; ++y) {
        in.read(reinterpret_cast<char*>(row.data()), row_bytes);
        if (in.gcount() != row_bytes) {
            throw IoError(path + ": truncated mask data");
        }
        for (int x = 0; x < mask.width; ++x) {
            mask.set(x, y, (row[x / 8] >> (7 - x % 8)) & 1);
        }
    }
    return mask;
}

void write_pbm(const BinaryMask& mask, const std::string& path) {
    if (!mask.valid()) {
        throw ShapeError("write_pbm: invalid mask");
    }
    auto out = open_out(path);
    out << "P4\n" << mask.width << " " << mask.height << "\n";
    const int row_bytes = (mask.width + 7) / 8;
    std::vector<std::uint8_t> row(row_bytes);
    for (int y = 0; y < mask.height; ++y) {
        std::fill(row.begin(), row.end(), 0);
        for (int x = 0; x < mask.width; ++x) {
            if (mask.get(x, y)) {
                row[x / 8] |= static_cast<std::uint8_t>(1u << (7 - x % 8));
            }
        }
        out.write(reinterpret_cast<const char*>(row.data()), row_bytes);
    }
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

RgbaPatch read_pam(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line != "P7") {
        throw IoError(path + ": not a PAM (P7)");
    }
    int width = 0;
    int height = 0;
    int depth = 0;
    int maxval = 0;
    while (std::getline(in, line)) {
        if (line == "ENDHDR") {
            break;
        }
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "WIDTH") {
            ls >> width;
        } else if (key == "HEIGHT") {
            ls >> height;
        } else if (key == "DEPTH") {
            ls >> depth;
        } else if (key == "MAXVAL") {
            ls >> maxval;
        }
    }
    if (width <= 0 || height <= 0 || depth != 4 || maxval != 255) {
        throw IoError(path + ": unsupported PAM header (need RGBA, maxval 255)");
    }
    RgbaPatch patch(width, height);
    in.read(reinterpret_cast<char*>(patch.pixels.data()),
            static_cast<std::streamsize>(patch.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(patch.pixels.size())) {
        throw IoError(path + ": truncated PAM data");
    }
    return patch;
}

void write_pam(const RgbaPatch& patch, const std::string& path) {
    if (!patch.valid()) {
        throw ShapeError("write_pam: invalid patch");
    }
    auto out = open_out(path);
    out << "P7\nWIDTH " << patch.width << "\nHEIGHT " << patch.height
        << "\nDEPTH 4\nMAXVAL 255\nTUPLTYPE RGB_ALPHA\nENDHDR\n";
    out.write(reinterpret_cast<const char*>(patch.pixels.data()),
              static_cast<std::streamsize>(patch.pixels.size()));
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

}  // namespace ace
