package com.metrics;

import java.util.ArrayList;
import java.util.List;

public class Registry {
    private final List<Metric> metrics = new ArrayList<Metric>();

    public void register(Metric metric) {
        metrics.add(metric);
    }

    public Metric at(int index) {
        return metrics.get(index);
    }

    public int size() {
        return metrics.size();
    }
}
