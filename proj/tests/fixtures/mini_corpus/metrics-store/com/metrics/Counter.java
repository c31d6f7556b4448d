package com.metrics;

public class Counter extends Metric {
    private long count;

    public Counter(String name) {
        super(name);
    }

    public void increment() {
        count += 1;
    }

    public double value() {
        return count;
    }
}
