#pragma once

#include <string>
#include <vector>

namespace fwm::svg {

struct Series {
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f6fb2";
    bool line = true;
    bool markers = false;
    std::string label;
};

// Minimal line/scatter plot writer; no external dependencies. CSV output
// remains the authoritative artifact.
class Plot {
public:
    Plot(std::string title, std::string xlabel, std::string ylabel);

    void set_log_x(bool on) { log_x_ = on; }
    void set_log_y(bool on) { log_y_ = on; }
    void add(Series s);
    std::string render() const;
    void write(const std::string& path) const;

private:
    std::string title_, xlabel_, ylabel_;
    bool log_x_ = false, log_y_ = false;
    std::vector<Series> series_;
};

}  // namespace fwm::svg
