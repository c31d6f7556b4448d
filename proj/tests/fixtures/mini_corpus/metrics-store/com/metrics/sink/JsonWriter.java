package com.metrics.sink;

public class JsonWriter {
    private final StringBuilder out = new StringBuilder();

    public void openObject() {
        out.append("{");
    }

    public void field(String key, double value) {
        if (out.length() > 1) {
            out.append(",");
        }
        out.append(key).append("=").append(value);
    }

    public void closeObject() {
        out.append("}");
    }

    public String document() {
        return out.toString();
    }
}
