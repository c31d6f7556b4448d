package com.metrics;

public class Gauge extends Metric {
    private double level;

    public Gauge(String name) {
        super(name);
    }

    public void set(double next) {
        level = next;
    }

    public double value() {
        return level;
    }
}
