package com.example.billing;

public class Account {
    private final String owner;
    private int tier;

    public Account(String owner, int tier) {
        this.owner = owner;
        this.tier = tier;
    }

    public String getOwner() {
        return owner;
    }

    public int getTier() {
        return tier;
    }
}
