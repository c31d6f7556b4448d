package com.metrics;

public class Metric {
    protected final String name;

    public Metric(String name) {
        this.name = name;
    }

    public String getName() {
        return name;
    }

    public double value() {
        return 0.0;
    }
}
