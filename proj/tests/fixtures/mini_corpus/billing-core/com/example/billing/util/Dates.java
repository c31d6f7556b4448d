package com.example.billing.util;

public final class Dates {
    public static final long DAY_MILLIS = 86400000L;

    public static long startOfDay(long epochMillis) {
        return epochMillis - epochMillis % DAY_MILLIS;
    }

    public static int dayIndex(long epochMillis) {
        return (int)(epochMillis / DAY_MILLIS);
    }
}
