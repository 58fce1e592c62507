#include "fwm/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fwm/errors.hpp"

namespace fwm::svg {

namespace {
constexpr double kWidth = 640.0, kHeight = 440.0;
constexpr double kLeft = 70.0, kRight = 20.0, kTop = 36.0, kBottom = 52.0;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

std::vector<double> nice_ticks(double lo, double hi, bool log_scale) {
    std::vector<double> t;
    if (log_scale) {
        int e0 = static_cast<int>(std::floor(std::log10(lo)));
        int e1 = static_cast<int>(std::ceil(std::log10(hi)));
        for (int e = e0; e <= e1; ++e) {
            double v = std::pow(10.0, e);
            if (v >= lo * 0.999 && v <= hi * 1.001) t.push_back(v);
        }
        if (t.size() < 2) t = {lo, hi};
        return t;
    }
    double span = hi - lo;
    if (span <= 0.0) return {lo};
    double step = std::pow(10.0, std::floor(std::log10(span / 4.0)));
    if (span / step > 8.0) step *= 2.0;
    if (span / step > 8.0) step *= 2.5;
    double v = std::ceil(lo / step) * step;
    for (; v <= hi + 1e-12 * span; v += step) t.push_back(v);
    return t;
}
}  // namespace

Plot::Plot(std::string title, std::string xlabel, std::string ylabel)
    : title_(std::move(title)),
      xlabel_(std::move(xlabel)),
      ylabel_(std::move(ylabel)) {}

void Plot::add(Series s) { series_.push_back(std::move(s)); }

std::string Plot::render() const {
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const Series& s : series_) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            double x = s.x[i], y = s.y[i];
            if (log_x_ && !(x > 0.0)) continue;
            if (log_y_ && !(y > 0.0)) continue;
            xmin = std::min(xmin, x); xmax = std::max(xmax, x);
            ymin = std::min(ymin, y); ymax = std::max(ymax, y);
        }
    }
    bool empty = xmin > xmax;
    if (empty) { xmin = 0; xmax = 1; ymin = 0; ymax = 1; }
    if (xmin == xmax) { xmin -= 0.5; xmax += 0.5; }
    if (ymin == ymax) { ymin -= 0.5; ymax += 0.5; }
    if (!log_x_) { double m = 0.04 * (xmax - xmin); xmin -= m; xmax += m; }
    else { xmin /= 1.3; xmax *= 1.3; }
    if (!log_y_) { double m = 0.06 * (ymax - ymin); ymin -= m; ymax += m; }
    else { ymin /= 1.5; ymax *= 1.5; }

    auto tx = [&](double x) {
        double u = log_x_ ? (std::log10(x) - std::log10(xmin)) /
                                (std::log10(xmax) - std::log10(xmin))
                          : (x - xmin) / (xmax - xmin);
        return kLeft + u * (kWidth - kLeft - kRight);
    };
    auto ty = [&](double y) {
        double u = log_y_ ? (std::log10(y) - std::log10(ymin)) /
                                (std::log10(ymax) - std::log10(ymin))
                          : (y - ymin) / (ymax - ymin);
        return kHeight - kBottom - u * (kHeight - kTop - kBottom);
    };

    std::ostringstream os;
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth
       << "' height='" << kHeight << "'>\n";
    os << "<rect width='100%' height='100%' fill='white'/>\n";
    os << "<text x='" << kWidth / 2 << "' y='20' text-anchor='middle' "
          "font-size='15' font-family='sans-serif'>" << title_ << "</text>\n";
    // axes box
    os << "<rect x='" << kLeft << "' y='" << kTop << "' width='"
       << kWidth - kLeft - kRight << "' height='" << kHeight - kTop - kBottom
       << "' fill='none' stroke='black'/>\n";
    for (double t : nice_ticks(xmin, xmax, log_x_)) {
        double px = tx(t);
        os << "<line x1='" << px << "' y1='" << kHeight - kBottom << "' x2='"
           << px << "' y2='" << kHeight - kBottom + 5 << "' stroke='black'/>\n";
        os << "<text x='" << px << "' y='" << kHeight - kBottom + 18
           << "' text-anchor='middle' font-size='11' "
              "font-family='sans-serif'>" << fmt(t) << "</text>\n";
    }
    for (double t : nice_ticks(ymin, ymax, log_y_)) {
        double py = ty(t);
        os << "<line x1='" << kLeft - 5 << "' y1='" << py << "' x2='" << kLeft
           << "' y2='" << py << "' stroke='black'/>\n";
        os << "<text x='" << kLeft - 8 << "' y='" << py + 4
           << "' text-anchor='end' font-size='11' font-family='sans-serif'>"
           << fmt(t) << "</text>\n";
    }
    os << "<text x='" << kWidth / 2 << "' y='" << kHeight - 12
       << "' text-anchor='middle' font-size='13' font-family='sans-serif'>"
       << xlabel_ << "</text>\n";
    os << "<text x='16' y='" << kHeight / 2
       << "' text-anchor='middle' font-size='13' font-family='sans-serif' "
          "transform='rotate(-90 16 " << kHeight / 2 << ")'>" << ylabel_
       << "</text>\n";

    for (const Series& s : series_) {
        if (s.line && s.x.size() > 1) {
            os << "<polyline fill='none' stroke='" << s.color
               << "' stroke-width='1.5' points='";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (log_x_ && !(s.x[i] > 0.0)) continue;
                if (log_y_ && !(s.y[i] > 0.0)) continue;
                os << tx(s.x[i]) << ',' << ty(s.y[i]) << ' ';
            }
            os << "'/>\n";
        }
        if (s.markers || !s.line) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (log_x_ && !(s.x[i] > 0.0)) continue;
                if (log_y_ && !(s.y[i] > 0.0)) continue;
                os << "<circle cx='" << tx(s.x[i]) << "' cy='" << ty(s.y[i])
                   << "' r='3' fill='" << s.color << "'/>\n";
            }
        }
    }
    double ly = kTop + 14;
    for (const Series& s : series_) {
        if (s.label.empty()) continue;
        os << "<circle cx='" << kWidth - kRight - 150 << "' cy='" << ly - 4
           << "' r='4' fill='" << s.color << "'/>\n";
        os << "<text x='" << kWidth - kRight - 140 << "' y='" << ly
           << "' font-size='11' font-family='sans-serif'>" << s.label
           << "</text>\n";
        ly += 16;
    }
    os << "</svg>\n";
    return os.str();
}

void Plot::write(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw config_error("cannot write SVG file: " + path);
    f << render();
}

}  // namespace fwm::svg
