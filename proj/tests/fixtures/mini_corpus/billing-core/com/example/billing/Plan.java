package com.example.billing;

public enum Plan {
    FREE, PRO, TEAM;

    public boolean isPaid() {
        return this != FREE;
    }

    public static Plan byTier(int tier) {
        if (tier >= 2) {
            return TEAM;
        }
        if (tier == 1) {
            return PRO;
        }
        return FREE;
    }
}
