#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace oscbound {

/// Minimal ordered JSON writer. Keys are emitted in call order and doubles
/// with 17 significant digits, so equal reports serialize to equal bytes.
/// Non-finite values become the strings "inf", "-inf", "nan".
class JsonWriter {
public:
    [[nodiscard]] const std::string& str() const { return out_; }

    void begin_object() { open('{'); }
    void end_object() { close('}'); }
    void begin_array() { open('['); }
    void end_array() { close(']'); }

    void key(const std::string& k) {
        comma();
        quote(k);
        out_ += ':';
        pending_value_ = true;
    }

    void value(double v) {
        comma();
        if (std::isnan(v)) {
            quote("nan");
        } else if (std::isinf(v)) {
            quote(v > 0 ? "inf" : "-inf");
        } else {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out_ += buf;
        }
    }
    void value(int v) { comma(); out_ += std::to_string(v); }
    void value(long v) { comma(); out_ += std::to_string(v); }
    void value(long long v) { comma(); out_ += std::to_string(v); }
    void value(unsigned long long v) { comma(); out_ += std::to_string(v); }
    void value(bool v) { comma(); out_ += v ? "true" : "false"; }
    void value(const char* v) { comma(); quote(v); }
    void value(const std::string& v) { comma(); quote(v); }
    void null_value() { comma(); out_ += "null"; }

    template <typename T>
    void field(const std::string& k, const T& v) {
        key(k);
        value(v);
    }
    void field(const std::string& k, const std::vector<double>& vs) {
        key(k);
        begin_array();
        for (double v : vs) value(v);
        end_array();
    }
    void field(const std::string& k, const std::vector<int>& vs) {
        key(k);
        begin_array();
        for (int v : vs) value(v);
        end_array();
    }
    void null_field(const std::string& k) {
        key(k);
        null_value();
    }

private:
    void open(char c) {
        comma();
        out_ += c;
        need_comma_.push_back(false);
    }
    void close(char c) {
        out_ += c;
        need_comma_.pop_back();
        mark_written();
    }
    void comma() {
        if (pending_value_) {
            pending_value_ = false;
            return;
        }
        if (!need_comma_.empty() && need_comma_.back()) out_ += ',';
        mark_written();
    }
    void mark_written() {
        if (!need_comma_.empty()) need_comma_.back() = true;
    }
    void quote(const std::string& s) {
        out_ += '"';
        for (char c : s) {
            switch (c) {
                case '"': out_ += "\\\""; break;
                case '\\': out_ += "\\\\"; break;
                case '\n': out_ += "\\n"; break;
                case '\t': out_ += "\\t"; break;
                default: out_ += c;
            }
        }
        out_ += '"';
    }

    std::string out_;
    std::vector<bool> need_comma_;
    bool pending_value_ = false;
};

/// CSV cell formatting with the same 17-digit convention.
inline std::string csv_num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace oscbound
