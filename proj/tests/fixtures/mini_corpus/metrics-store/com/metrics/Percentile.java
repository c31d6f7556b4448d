package com.metrics;

import java.util.Arrays;

public final class Percentile {
    private Percentile() {
    }

    public static double rank(double[] samples, double fraction) {
        if (samples.length == 0) {
            return 0.0;
        }
        double[] sorted = samples.clone();
        Arrays.sort(sorted);
        int last = sorted.length - 1;
        int index = (int)(fraction * last);
        return sorted[index];
    }
}
